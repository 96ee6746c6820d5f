//! Exact arithmetic for point configurations in the projective plane over
//! cyclotomic fields, with tools for Sylvester–Gallai style questions.

pub mod addcomb;
pub mod cubicgroup;
pub mod curves;
pub mod cycfield;
pub mod linalg;
pub mod poly;
pub mod projgeom;
pub mod sgcore;
