//! Color reduction in anonymous networks where nodes only start with an initial
//! proper coloring.
//!
//! The crate has three layers:
//! - [`graph`], [`view`] and [`sim`] model the network, the information a node
//!   can gather in `r` rounds, and a synchronous round simulator with set or
//!   multiset delivery.
//! - [`algos`] holds the upper-bound programs (Linial, Kuhn-Wattenhofer and
//!   their composition into a (Δ+1)-coloring).
//! - [`nbhd`], [`bounds`] and [`chromatic`] build neighborhood graphs, the
//!   homomorphisms between them, and the constructive refuters that exhibit an
//!   uncolored vertex for any coloring with too few colors.

pub mod algos;
pub mod bounds;
pub mod chromatic;
pub mod cli;
pub mod graph;
pub mod nbhd;
pub mod sim;
pub mod view;

pub use graph::{Adjacency, Color, ColorAssignment, ColoredGraph, SimpleGraph};
pub use view::{Delivery, View};
