use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Guest,
    Analyst,
    Admin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Permission {
    Chat,
    Retrieve,
    MetricsRead,
    DocsWrite,
    /// Explicit lookup of a pseudonym's original value.
    VaultResolve,
    /// Restoring pseudonyms inside a chat response.
    Rehydrate,
}

impl Role {
    /// admin: everything; analyst: chat, retrieval, metrics and rehydration;
    /// guest: chat only.
    pub fn grants(self, p: Permission) -> bool {
        match self {
            Role::Admin => true,
            Role::Analyst => matches!(
                p,
                Permission::Chat | Permission::Retrieve | Permission::MetricsRead | Permission::Rehydrate
            ),
            Role::Guest => p == Permission::Chat,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Guest => "guest",
            Role::Analyst => "analyst",
            Role::Admin => "admin",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Permission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Permission::Chat => "chat",
            Permission::Retrieve => "retrieve",
            Permission::MetricsRead => "metrics:read",
            Permission::DocsWrite => "docs:write",
            Permission::VaultResolve => "vault:resolve",
            Permission::Rehydrate => "vault:rehydrate",
        };
        f.write_str(s)
    }
}

/// An authenticated caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub key_id: String,
    pub role: Role,
    pub display_name: String,
}

impl Principal {
    pub fn new(key_id: impl Into<String>, role: Role, display_name: impl Into<String>) -> Self {
        Self {
            key_id: key_id.into(),
            role,
            display_name: display_name.into(),
        }
    }

    pub fn can(&self, p: Permission) -> bool {
        self.role.grants(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_table() {
        use Permission::*;
        let all = [Chat, Retrieve, MetricsRead, DocsWrite, VaultResolve, Rehydrate];
        assert!(all.iter().all(|&p| Role::Admin.grants(p)));
        assert_eq!(all.iter().filter(|&&p| Role::Guest.grants(p)).count(), 1);
        assert!(Role::Analyst.grants(MetricsRead) && !Role::Analyst.grants(VaultResolve));
        assert!(Role::Guest < Role::Analyst && Role::Analyst < Role::Admin);
    }
}
