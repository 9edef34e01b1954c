//! Scene files, template generators and the stage pipeline behind the CLI.

pub mod generate;
pub mod pipeline;
pub mod scene;

pub use generate::{generate_scene, mutate, Mutation, Params};
pub use pipeline::{exit_code, run_pipeline, Report, Stage, StageOutcome, StageResult};
pub use scene::{load_scene, load_scene_with, parse_scene, save_scene, Overrides, Scene};
