//! Local averages, nontangential maximal functions, square functions and
//! boundary norms.

pub mod average;
pub mod nt;
pub mod square;

pub use average::{ball_average, local_average, local_averages};
pub use nt::{
    boundary_lp_norm, nt_sweep, ntmax, ntmax_at_face, ntmax_batch, ntmax_filtered, ntmax_split,
    DepthFilter, NTReport,
};
pub use square::{
    power_transform, square_function, square_function_report, truncated_cone_cells,
    SquareFunctionReport,
};
