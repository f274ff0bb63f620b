// mdbook cannot run the listings against a workspace crate, so each chapter
// is pulled in as the docs of an empty module and rustdoc tests it.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/spectra-and-coefficients.md")]
pub mod spectra_and_coefficients {}
#[doc = include_str!("src/nodal-polynomials.md")]
pub mod nodal_polynomials {}
#[doc = include_str!("src/tail-series.md")]
pub mod tail_series {}
#[doc = include_str!("src/k-matrix.md")]
pub mod k_matrix {}
#[doc = include_str!("src/gram-route.md")]
pub mod gram_route {}
#[doc = include_str!("src/smooth-functions.md")]
pub mod smooth_functions {}
#[doc = include_str!("src/command-line.md")]
pub mod command_line {}
#[doc = include_str!("../README.md")]
pub mod readme {}
