//! Bundled synthetic name universe. Nothing here is read from outside the
//! binary, so generated identities can never contain real-world PII.

pub const FIRST_NAMES: &[&str] = &[
    "Alice", "John", "Aaron", "Abigail", "Adam", "Adele", "Adrian", "Agnes", "Aidan", "Alan",
    "Albert", "Alexa", "Alfred", "Alma", "Alvin", "Amanda", "Amber", "Amelia", "Amos", "Andrea",
    "Andrew", "Angela", "Anita", "Anton", "Arthur", "Audrey", "Austin", "Ava", "Barbara", "Basil",
    "Beatrice", "Benjamin", "Bernard", "Bertha", "Bianca", "Blake", "Boris", "Brenda", "Brian", "Bruno",
    "Caleb", "Camila", "Carlos", "Carmen", "Caroline", "Casper", "Cecilia", "Cedric", "Celine", "Charles",
    "Chloe", "Clara", "Claude", "Colin", "Conrad", "Cora", "Cyrus", "Daisy", "Damian", "Daniel",
    "Daphne", "Darius", "David", "Delia", "Denise", "Derek", "Diana", "Dmitri", "Dolores", "Dorian",
    "Edgar", "Edith", "Edmund", "Edwin", "Eileen", "Elena", "Elias", "Eliza", "Elliot", "Elsa",
    "Emil", "Emma", "Enzo", "Erica", "Ernest", "Esther", "Ethan", "Eugene", "Eva", "Felix",
    "Fiona", "Flora", "Floyd", "Frances", "Franklin", "Freya", "Gabriel", "Gavin", "Gemma", "George",
    "Gerald", "Gideon", "Gilbert", "Gloria", "Gordon", "Greta", "Gustav", "Hannah", "Harold", "Harriet",
    "Hector", "Helen", "Henry", "Hilda", "Hugo", "Ian", "Ida", "Igor", "Imogen", "Ingrid",
    "Irene", "Isaac", "Isabel", "Ivan", "Jacob", "Jasper", "Jenna", "Jerome", "Joanna", "Joel",
    "Jonah", "Josephine", "Judith", "Julian", "Juliet", "Karen", "Karl", "Katrina", "Keith", "Kevin",
    "Lara", "Laura", "Leon", "Leonora", "Lewis", "Lidia", "Lionel", "Lorena", "Lucas", "Lucia",
    "Luther", "Lydia", "Magnus", "Malcolm", "Marcus", "Margot", "Maria", "Marvin", "Matilda", "Maxine",
    "Melvin", "Mildred", "Miriam", "Monica", "Nadia", "Nathan", "Nelson", "Nina", "Noah", "Norman",
    "Olga", "Oliver", "Olivia", "Oscar", "Otto", "Pamela", "Patrick", "Paula", "Percy", "Philip",
    "Priya", "Quentin", "Rachel", "Ralph", "Ramona", "Raphael", "Rebecca", "Reuben", "Rhoda", "Roland",
    "Rosa", "Rupert", "Sabrina", "Samuel", "Sandra", "Selma", "Silas", "Simone", "Sophia", "Stella",
    "Tamara", "Thea", "Theodore", "Tobias", "Ursula", "Valerie", "Victor", "Vivian", "Walter", "Wendy",
    "Xavier", "Yolanda", "Yusuf", "Zara", "Zoe",
];

pub const LAST_NAMES: &[&str] = &[
    "Fox", "Smith", "Abbott", "Acosta", "Adler", "Aguilar", "Albright", "Alvarez", "Anderson", "Archer",
    "Armstrong", "Atkins", "Bailey", "Baker", "Baldwin", "Barker", "Barnes", "Bauer", "Becker", "Benson",
    "Bishop", "Blackwell", "Bowman", "Bradley", "Brennan", "Brooks", "Burke", "Calhoun", "Campbell", "Cardenas",
    "Carlson", "Castillo", "Chandler", "Chen", "Clarke", "Coleman", "Conway", "Cortez", "Crawford", "Dalton",
    "Dawson", "Delgado", "Dixon", "Donovan", "Draper", "Duncan", "Durand", "Eastman", "Ellison", "Emerson",
    "Espinoza", "Everett", "Farley", "Ferguson", "Fischer", "Fleming", "Fletcher", "Forsyth", "Franco", "Fuller",
    "Gallagher", "Garcia", "Garrison", "Gibson", "Goodwin", "Graham", "Gutierrez", "Hale", "Hammond", "Hansen",
    "Harding", "Hartman", "Hawkins", "Hendricks", "Herrera", "Hoffman", "Holland", "Hopkins", "Hughes", "Ingram",
    "Jacobs", "Jensen", "Jimenez", "Kaplan", "Keller", "Kendall", "Kimura", "Kirby", "Koch", "Kowalski",
    "Lambert", "Larsen", "Lawson", "Lindqvist", "Lowell", "Lynch", "Maddox", "Maldonado", "Mercer", "Meyer",
    "Molina", "Montgomery", "Morales", "Morrison", "Murphy", "Nakamura", "Navarro", "Nielsen", "Norris", "Novak",
    "Oakley", "Ochoa", "Olsen", "Ortega", "Osborne", "Padilla", "Palmer", "Parsons", "Pearson", "Petrov",
    "Phelps", "Pierce", "Porter", "Quinn", "Ramirez", "Randall", "Reyes", "Richter", "Rios", "Robles",
    "Rodriguez", "Romero", "Rosen", "Russo", "Salazar", "Sandoval", "Schmidt", "Schultz", "Serrano", "Shapiro",
    "Sherman", "Silva", "Sinclair", "Sorensen", "Stanton", "Steele", "Stokes", "Sullivan", "Sutton", "Tanaka",
    "Thornton", "Torres", "Townsend", "Tucker", "Underwood", "Valdez", "Vance", "Vargas", "Vaughn", "Vega",
    "Wagner", "Walsh", "Warner", "Watkins", "Weber", "Wheeler", "Whitaker", "Wilkins", "Winslow", "Wolfe",
    "Yamamoto", "Yates", "Young", "Zamora", "Zimmerman", "Ziegler", "Ashford", "Beaumont", "Caldwell", "Dunbar",
    "Eriksen", "Fairbanks", "Galloway", "Holloway", "Iverson", "Jorgensen", "Kessler", "Langley", "Macintyre", "Nash",
    "Oyelaran", "Pemberton", "Quiroga", "Rasmussen", "Stroud", "Thackeray", "Ulrich", "Voss", "Whitfield", "Xiong",
    "Yardley", "Zeller", "Amsel", "Brandt", "Crowley", "Dorsey", "Engel", "Falk", "Grantham", "Haskins",
];

/// Mail domains used for synthetic addresses; all reserved or fictional.
pub const EMAIL_DOMAINS: &[&str] = &[
    "example.com", "example.org", "example.net", "mail.test", "inbox.test", "corp.example", "bank.example",
];
