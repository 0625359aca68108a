pub mod example;
pub mod extract;
pub mod forward;
pub mod invert;
pub mod roundtrip;
pub mod selfcheck;
