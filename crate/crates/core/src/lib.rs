//! Multi-parameter quantum Fisher information of equatorial qudits sent
//! through 1→2 quantum cloning machines.
//!
//! - [`states`]: equatorial states, phase shifts, Gram-Schmidt complement basis
//! - [`channels`]: shrinking channel, universal and phase-covariant cloners
//! - [`qfim`]: closed forms and the spectral QFIM formula
//! - [`crb`]: attainability matrix, QFIM spectrum, total-variance bounds
//! - [`oracle`]: finite-difference SLD route, independent of [`qfim`]
//! - [`cli`]: sweep, figure and verification front end

pub mod channels;
pub mod cli;
pub mod crb;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod qfim;
pub mod states;

pub use error::{Error, Result};
