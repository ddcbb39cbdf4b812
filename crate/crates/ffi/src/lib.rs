//! C ABI for the afp library. Populated alongside the core crate.
