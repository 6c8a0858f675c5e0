use super::*;
use crate::model::{DayType1, DayType2, FamilyPosition, Gender, InterviewType};
use proptest::prelude::*;

fn covariates() -> Covariates {
    Covariates {
        gender: Gender::Male,
        day_type1: DayType1::Weekday,
        day_type2: DayType2::NormalWeekday,
        interview: InterviewType::Telephone,
        schedule: None,
        region: None,
        family_position: FamilyPosition::Single,
        year: 2020,
        cross_region: false,
    }
}

fn rec(resp: &str, trip: u32, first: i64, last: i64) -> ErrorRecord {
    ErrorRecord {
        respondent_id: Arc::from(resp),
        trip_index: trip,
        signed_first: first,
        signed_last: last,
        abs_first: first.unsigned_abs(),
        abs_last: last.unsigned_abs(),
        mode: ModeCategory::TrainOnly,
        covariates: covariates(),
    }
}

#[test]
fn describe_quartiles() {
    let d = describe(&[60.0, 120.0, 180.0, 240.0]).unwrap();
    assert_eq!((d.q1, d.median, d.q3, d.iqr), (1.75, 2.5, 3.25, 1.5));
    let d = describe(&[300.0; 3]).unwrap();
    assert_eq!((d.mean, d.std, d.iqr), (5.0, Some(0.0), 0.0));
    assert_eq!(describe(&[60.0]).unwrap().std, None);
    assert_eq!(describe(&[]), Err(MetricsError::EmptySample));
}

proptest! {
    #[test]
    fn describe_is_ordered(v in proptest::collection::vec(0u32..100_000, 1..200)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let d = describe(&v).unwrap();
        prop_assert!(d.min <= d.q1 && d.q1 <= d.median && d.median <= d.q3 && d.q3 <= d.max);
        prop_assert!(d.iqr >= 0.0);
    }

    #[test]
    fn cutoff_monotone(v in proptest::collection::vec(0u64..20_000, 1..200)) {
        let mut prev: Option<(usize, f64)> = None;
        for c in [f64::INFINITY, 200.0, 100.0, 60.0, 30.0] {
            let kept = apply_cutoff(&v, c).kept;
            let med = if kept.is_empty() {
                f64::NEG_INFINITY
            } else {
                describe(&kept.iter().map(|&s| s as f64).collect::<Vec<_>>()).unwrap().median
            };
            if let Some((n, m)) = prev {
                prop_assert!(kept.len() <= n);
                prop_assert!(med <= m);
            }
            prev = Some((kept.len(), med));
        }
    }
}

#[test]
fn sign_convention() {
    // reported 08:00, tap 08:05 -> +300
    let r = rec("a", 1, 300, 0);
    assert_eq!((r.signed_first, r.abs_first), (300, 300));
    let r = rec("a", 1, -300, 0);
    assert_eq!((r.signed_first, r.abs_first), (-300, 300));
}

#[test]
fn quadrants() {
    assert_eq!(quadrant_counts(&[rec("a", 1, 300, 200)]).late_late, 1);
    assert_eq!(quadrant_counts(&[rec("a", 1, -300, 200)]).early_late, 1);
    let q = quadrant_counts(&[
        rec("a", 1, 1, 1),
        rec("a", 2, -1, -1),
        rec("b", 1, 1, -1),
        rec("b", 2, -1, 1),
        rec("c", 1, 0, 5),
        rec("c", 2, 5, 0),
        rec("d", 1, 0, 0),
    ]);
    assert_eq!(q.fractions(), Some([0.25; 4]));
    assert_eq!((q.zero_first_only, q.zero_last_only, q.zero_both), (1, 1, 1));
    assert_eq!(q.total(), 7);
    assert_eq!(QuadrantCounts::default().fractions(), None);
}

#[test]
fn pairs_only_from_two_trip_respondents() {
    let recs = [
        rec("a", 2, 600, 0),
        rec("a", 1, -300, 0),
        rec("b", 1, 1, 0),
        rec("b", 2, 2, 0),
        rec("b", 3, 3, 0),
    ];
    assert_eq!(first_second_pairs(&recs), [(300, 600)]);
    assert!(first_second_pairs(&[]).is_empty());
}

#[test]
fn cutoff_examples() {
    let v = [600, 2400, 15_000];
    assert_eq!(apply_cutoff(&v, 200.0).kept, [600, 2400]);
    assert_eq!(apply_cutoff(&v, 1000.0).kept, v);
    let all = apply_cutoff(&v, 5.0);
    assert!(all.kept.is_empty());
    assert_eq!(all.excluded, 3);
    // strictly below: exactly 30 minutes is dropped
    assert_eq!(apply_cutoff(&[1800], 30.0).excluded, 1);
    assert_eq!(apply_pair_cutoff(&[(10, 4000), (10, 20)], 60.0).kept, [(10, 20)]);
}

#[test]
fn correlation() {
    let same: Vec<_> = (0..10).map(|i| rec("a", 1, i * 7 - 20, i * 7 - 20)).collect();
    assert!((signed_correlation(&same).unwrap() - 1.0).abs() < 1e-12);
    let neg: Vec<_> = (0..10).map(|i| rec("a", 1, i * 7 - 20, 20 - i * 7)).collect();
    assert!((signed_correlation(&neg).unwrap() + 1.0).abs() < 1e-12);
    let flat: Vec<_> = (0..10).map(|i| rec("a", 1, i, 5)).collect();
    assert_eq!(signed_correlation(&flat), Err(MetricsError::DegenerateVariance));
    assert_eq!(signed_correlation(&same[..1]), Err(MetricsError::TooFewRecords));
}

#[test]
fn histogram_bins() {
    let h = minute_histogram([-61, -1, 0, 59, 60]);
    assert_eq!(h.into_iter().collect::<Vec<_>>(), [(-2, 1), (-1, 1), (0, 2), (1, 1)]);
}
