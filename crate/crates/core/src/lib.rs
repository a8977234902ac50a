pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod measure;
pub mod observables;
pub mod pump;
pub mod rng;
pub mod scenario;
pub mod spdc;
pub mod special;
