//! Core library for verifying that short intervals around perfect powers
//! contain primes, and for certifying the explicit sieve inequality chain
//! that covers the asymptotic range.
//!
//! The crate splits into three layers:
//!
//! * exact integer arithmetic and primality certification
//!   ([`arith`], [`bls`]),
//! * the interval verification engine that sieves candidate ranges and
//!   produces certificates ([`engine`], [`store`]),
//! * outward-rounded numerics for the analytic side: linear-sieve shape
//!   functions, Mertens-product windows, and the theorem certifier
//!   ([`bound`], [`estimates`], [`certifier`]).

pub mod arith;
pub mod bls;
pub mod bound;
pub mod certifier;
pub mod engine;
pub mod estimates;
pub mod store;
