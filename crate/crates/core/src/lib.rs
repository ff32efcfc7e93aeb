pub mod detector;
pub mod field;
pub mod harvest;
pub mod quad;
pub mod specfun;

pub use specfun::ComplexValue;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/spacetime.md")]
    mod spacetime {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/harvesting.md")]
    mod harvesting {}
}
