//! Grid, quadrature, root-finding and interpolation shared by every other
//! module.
//!
//! Exchange rates live on a log-uniform [`PriceGrid`]. Integrals over `p`
//! are evaluated as trapezoid sums in `ln p`, i.e. `∫ f(p) dp = ∫ f(p)·p d(ln p)`.

mod gauss;
mod grid;
mod interp;
mod quadrature;
mod roots;

pub use gauss::GaussLegendre;
pub use grid::{make_log_grid, PriceGrid};
pub use interp::MonotoneCubic;
pub(crate) use quadrature::check_len;
pub use quadrature::{
    cumulative_log, integral_to, integrate_closed, integrate_log, split_at, tail_above, tail_below,
    trapezoid_log, Weight,
};
pub use roots::bisect;
