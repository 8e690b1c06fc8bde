//! Lifting-scheme 2-D discrete wavelet transforms.
//!
//! The crate models every scheme as a list of 4x4 polyphase step matrices
//! over sparse Laurent polynomials, proves the schemes equivalent by exact
//! matrix products, counts their arithmetic and synchronization cost, executes
//! them on images and simulates their execution on a tiled parallel machine.

pub mod laurent;
pub mod polyphase;
pub mod schemes;
pub mod transform;
pub mod parsim;
pub mod wavelets;
