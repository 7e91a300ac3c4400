use gad_scripting::Stage;
use gad_service::{stage_progress, AnimationJob, ApiError, JobState};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Advance(JobState),
    Report(f64),
    Stage(bool, usize, usize),
    Fail,
}

fn op() -> impl Strategy<Value = Op> {
    let state = prop::sample::select(vec![
        JobState::Queued,
        JobState::Fetching,
        JobState::Rendering,
        JobState::Done,
        JobState::Failed,
    ]);
    prop_oneof![
        state.prop_map(Op::Advance),
        (-1.0f64..2.0).prop_map(Op::Report),
        (any::<bool>(), 0usize..50, 1usize..50).prop_map(|(r, d, t)| Op::Stage(r, d.min(t), t)),
        Just(Op::Fail),
    ]
}

fn rank(s: JobState) -> u8 {
    match s {
        JobState::Queued => 0,
        JobState::Fetching => 1,
        JobState::Rendering => 2,
        JobState::Done | JobState::Failed => 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn progress_and_state_never_go_back(ops in prop::collection::vec(op(), 0..40)) {
        let mut j = AnimationJob::queued("job");
        let mut last = (j.state, j.progress);
        for op in ops {
            match op {
                Op::Advance(s) => { j.advance(s); }
                Op::Report(p) => j.report(p),
                Op::Stage(render, done, total) => {
                    let stage = if render { Stage::Rendering } else { Stage::Fetching };
                    j.report(stage_progress(stage, done, total));
                }
                Op::Fail => j.fail(&ApiError::internal("boom")),
            }
            prop_assert!(j.progress >= last.1);
            prop_assert!((0.0..=1.0).contains(&j.progress));
            prop_assert!(rank(j.state) >= rank(last.0));
            prop_assert!(j.state == last.0 || last.0.can_become(j.state));
            if last.0 == JobState::Done || last.0 == JobState::Failed {
                prop_assert_eq!(j.state, last.0);
            }
            last = (j.state, j.progress);
        }
        if j.state == JobState::Done {
            prop_assert_eq!(j.progress, 1.0);
        }
    }

    #[test]
    fn stage_progress_is_ordered(d1 in 0usize..100, d2 in 0usize..100, total in 1usize..100) {
        let (a, b) = (d1.min(d2).min(total), d1.max(d2).min(total));
        for stage in [Stage::Fetching, Stage::Rendering] {
            prop_assert!(stage_progress(stage, a, total) <= stage_progress(stage, b, total));
        }
        prop_assert!(stage_progress(Stage::Fetching, b, total) <= stage_progress(Stage::Rendering, a, total));
    }
}
