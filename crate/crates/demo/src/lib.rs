//! Browser demo bindings (wasm). Implemented later in the build.
