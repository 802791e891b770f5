//! Second-order moments of the passively induced fluctuation on flat space.

pub mod kernels;
pub mod moments;
pub mod smearing;
pub mod window;

pub use kernels::{c_number_kernel_pairing, RenormConstants};
pub use moments::{
    first_order_field_kernel, first_order_term, mean_phi, variance_adiabatic,
    variance_first_order_spectral, variance_spectral_quadrature, Conventions, MeanBreakdown, Sign,
};
pub use smearing::{Profile, TestFunction};
pub use window::{CouplingWindow, MollifierBump, SmoothProfile};
