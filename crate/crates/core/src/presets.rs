//! Built-in experiment schedules over the reference antigens.

use crate::engine::{ExperimentSpec, PoolAction, PresentationPhase};
use crate::fixtures;
use crate::population::PoolConfig;

pub const PRESET_NAMES: [&str; 4] = ["a1", "exp1", "exp2", "exp3"];

/// Pool configuration used by every preset.
///
/// The estimate distribution is centred on the positive side of the reference
/// antigens, and the clone factor is raised so that the short-term pool does
/// enough exploration inside a 10 or 20 generation presentation window.
pub fn preset_config() -> PoolConfig {
    PoolConfig {
        gaussian_mean: 1.0,
        gaussian_std: 0.75,
        clone_factor: 4,
        ..PoolConfig::with_band_width(fixtures::BAND_WIDTH)
    }
}

fn split(name: &str, second_action: PoolAction) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        phases: vec![
            PresentationPhase::incremental(1, fixtures::antigen_a1(), PoolAction::None),
            PresentationPhase::incremental(30, fixtures::antigen_a2(), second_action),
        ],
        total_generations: 50,
        truth: fixtures::split_truth(),
    }
}

/// `a1`: A1 alone over generations 1-10.
/// `exp1`: A1 then A2 from generation 30 on the original random pool.
/// `exp2`: A1 then A2 from generation 30 on clones of long-term memory.
/// `exp3`: the whole of A over generations 1-20.
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let spec = match name {
        "a1" => ExperimentSpec {
            name: name.into(),
            phases: vec![PresentationPhase::incremental(1, fixtures::antigen_a1(), PoolAction::None)],
            total_generations: 50,
            truth: crate::matching::enumerate_trends(&fixtures::antigen_a1().seq),
        },
        "exp1" => split(name, PoolAction::ResetToInitialPool),
        "exp2" => split(name, PoolAction::FeedbackFromMemory),
        "exp3" => ExperimentSpec {
            name: name.into(),
            phases: vec![PresentationPhase::incremental(1, fixtures::antigen_a(), PoolAction::None)],
            total_generations: 50,
            truth: fixtures::full_truth(),
        },
        _ => return None,
    };
    Some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_schedules() {
        let e1 = preset("exp1").unwrap();
        assert_eq!((e1.phases[0].start_gen, e1.phases[0].end_gen), (1, 10));
        assert_eq!((e1.phases[1].start_gen, e1.phases[1].end_gen), (30, 39));
        assert_eq!(e1.phases[1].pool_action_at_start, PoolAction::ResetToInitialPool);
        assert_eq!(e1.truth.len(), 7);
        let e2 = preset("exp2").unwrap();
        assert_eq!(e2.phases[1].pool_action_at_start, PoolAction::FeedbackFromMemory);
        let e3 = preset("exp3").unwrap();
        assert_eq!((e3.phases[0].start_gen, e3.phases[0].end_gen), (1, 20));
        assert_eq!(e3.truth.len(), 8);
        assert_eq!(preset("a1").unwrap().truth.len(), 3);
        for name in PRESET_NAMES {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(preset("exp9").is_none());
        preset_config().validate().unwrap();
    }
}
