use std::collections::BTreeMap;

use chrono::NaiveDate;
use polsent_core::kb::{orientation_of, KnowledgeBase, Orientation, OrientationScale};
use polsent_core::synth::{generate, SynthConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

/// Half-open buckets written out directly.
fn expected(x: f64) -> Orientation {
    if x < 2.0 {
        Orientation::RL
    } else if x < 4.0 {
        Orientation::CL
    } else if x < 6.0 {
        Orientation::C
    } else if x < 8.0 {
        Orientation::CR
    } else {
        Orientation::RR
    }
}

fn sweep() -> Result<usize, String> {
    let mut previous = None;
    for i in 0..=1000 {
        let x = i as f64 / 100.0;
        let o = orientation_of(x).map_err(|e| format!("{x}: {e}"))?;
        ensure!(o == expected(x), "{x} mapped to {o}, expected {}", expected(x));
        if let Some(p) = previous {
            ensure!(o >= p, "not monotone at {x}: {p} then {o}");
        }
        previous = Some(o);
    }
    Ok(1001)
}

fn boundaries() -> Result<(), String> {
    let cases = [
        (0.0, Orientation::RL),
        (2.0, Orientation::CL),
        (4.0, Orientation::C),
        (6.0, Orientation::CR),
        (8.0, Orientation::RR),
        (10.0, Orientation::RR),
    ];
    for (b, want) in cases {
        let got = orientation_of(b).map_err(|e| e.to_string())?;
        ensure!(got == want, "{b} mapped to {got}, expected {want}");
        if b > 0.0 {
            let below = f64::from_bits(b.to_bits() - 1);
            let got = orientation_of(below).map_err(|e| e.to_string())?;
            ensure!(got == expected(below), "{below} mapped to {got}");
            ensure!(b == 10.0 || got < want, "{below} should fall below the {want} bucket");
        }
    }
    for bad in [-0.01, 10.01, f64::NAN, f64::INFINITY] {
        ensure!(orientation_of(bad).is_err(), "{bad} should be rejected");
    }
    Ok(())
}

fn permutation_invariance() -> Result<usize, String> {
    let fixture = generate(&SynthConfig::default());
    let date = NaiveDate::from_ymd_opt(2020, 6, 1).unwrap();
    let resolve = |kb: &KnowledgeBase| -> BTreeMap<String, Option<Orientation>> {
        kb.persons
            .values()
            .map(|p| (p.kb_id.clone(), kb.resolve_orientation(p, date)))
            .collect()
    };
    let build = |persons, parties, crosswalk| {
        KnowledgeBase::new(persons, parties, crosswalk, OrientationScale::default()).map_err(|e| e.to_string())
    };
    let reference = resolve(&build(
        fixture.persons.clone(),
        fixture.parties.clone(),
        fixture.crosswalk.clone(),
    )?);
    ensure!(
        reference.values().any(Option::is_none) && reference.values().any(Option::is_some),
        "fixture should have both mapped and unmapped persons"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 50;
    for _ in 0..trials {
        let (mut persons, mut parties, mut crosswalk) = (
            fixture.persons.clone(),
            fixture.parties.clone(),
            fixture.crosswalk.clone(),
        );
        persons.shuffle(&mut rng);
        parties.shuffle(&mut rng);
        crosswalk.shuffle(&mut rng);
        let got = resolve(&build(persons, parties, crosswalk)?);
        ensure!(got == reference, "resolution changed under input permutation");
    }
    Ok(trials)
}

pub fn run() -> Outcome {
    let points = sweep()?;
    boundaries()?;
    let trials = permutation_invariance()?;
    Ok(format!(
        "{points}-point sweep total and monotone; boundaries 2/4/6/8 open above; resolution identical over {trials} permutations"
    ))
}
