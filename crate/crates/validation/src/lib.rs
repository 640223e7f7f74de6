//! Home of the `acceptance` test target; the checks live in
//! `tests/acceptance.rs` and run against the public `wwlab` API only.
