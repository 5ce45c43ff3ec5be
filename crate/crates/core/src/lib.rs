pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod words;
pub mod mapping_class;
pub mod holonomy;
pub mod intersection;
mod precise;
pub mod dehn_thurston;
pub mod filling;
pub mod measure;
pub mod orbit;
pub mod analysis;
pub mod report;

pub use analysis::{fit_exponent, fit_loglog, ratio_experiment, thurston_distance, ExponentFit, RatioExperiment, ThurstonDistance};
pub use dehn_thurston::{coordinates_of, dt_to_system, enumerate_multicurves, DTCoordinates};
pub use error::{Error, Result};
pub use filling::{is_filling, FillingStatus, Witness};
pub use holonomy::{build_holonomy, FenchelNielsen, Holonomy, PantsDecomposition};
pub use intersection::{crossings, geometric_intersection, pairing, pairing_integral, self_intersection, Crossing};
pub use mapping_class::{twist_generators, MappingClass, MappingClassGroup};
pub use measure::{estimate_m, HomogeneousFunctional, MeasureEstimate};
pub use orbit::{CountRecord, FrontierStats, OrbitCounter, OrbitNode, SearchOptions, SearchState};
pub use report::{count_table, CsvTable};
pub use words::{CyclicWord, GroupPresentation, SurfaceSignature, WeightedCurveSystem};
