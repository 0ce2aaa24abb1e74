//! Acceptance criteria for the numerical pipeline; see `tests/acceptance.rs`.
