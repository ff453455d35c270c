//! Acceptance checks for fockcc live in tests/acceptance.rs.
