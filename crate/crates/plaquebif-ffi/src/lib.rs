//! C ABI for plaquebif.
