//! Explicit chart models of surfaces carrying para-hyperhermitian or
//! para-hyperkähler structures: the Inoue family on the upper
//! half-plane times the complex line, and the Kamada torus and
//! primary-Kodaira families on a complex 2-plane chart.

pub mod inoue;
pub mod kamada;
