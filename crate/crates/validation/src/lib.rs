//! Holds the `acceptance` test target, which checks the numerical criteria
//! end to end and prints one PASS/FAIL line per criterion. Run it with
//! `cargo test -p rlcnet-validation --test acceptance`.
