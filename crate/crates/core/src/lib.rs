//! Combinatorial and numerical machinery for unicritical polynomials
//! `z^d + c`: exact arithmetic on external angles, circle laminations and
//! their dynamics, symbolic itineraries, external-ray tracing, and
//! puzzle-based fiber-triviality diagnostics.

pub mod angle;
pub mod dynamics;
pub mod fibers;
pub mod lamination;
pub mod poly;
pub mod symbolic;

pub use angle::{Angle, Frac, OrbitInfo};
pub use dynamics::{LandingTable, Map, PeriodicPointRec, TraceConfig, TracedRay};
pub use lamination::{Leaf, Polygon, TriangleOrbitReport};
pub use symbolic::{CharacteristicAngle, Itinerary};
