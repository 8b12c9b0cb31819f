use gridsoc_stats::{cohens_d, paired_t_test, tukey_hsd, two_way_anova, Df, Effect};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> Vec<Value> {
    let path = format!("{}/tests/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn close(got: f64, want: f64, tol: f64, what: &str) {
    let err = (got - want).abs() / want.abs().max(1.0);
    assert!(err <= tol, "{what}: got {got}, want {want}");
}

#[test]
fn paired_t_matches_reference() {
    for (i, c) in fixture("paired_t").iter().enumerate() {
        let r = paired_t_test(&floats(&c["x"]), &floats(&c["y"])).unwrap();
        close(r.statistic, c["t"].as_f64().unwrap(), 1e-8, &format!("t #{i}"));
        close(r.p_value.unwrap(), c["p"].as_f64().unwrap(), 1e-6, &format!("p #{i}"));
        close(r.estimate.unwrap(), c["mean_diff"].as_f64().unwrap(), 1e-10, &format!("diff #{i}"));
        assert_eq!(r.df, Some(Df::One(c["df"].as_f64().unwrap())));
    }
}

#[test]
fn anova_matches_reference() {
    for (i, c) in fixture("anova").iter().enumerate() {
        let a: Vec<&str> = c["a"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        let b: Vec<&str> = c["b"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        let t = two_way_anova(&floats(&c["y"]), &a, &b).unwrap();
        close(t.ss_error, c["ss_error"].as_f64().unwrap(), 1e-8, &format!("ss_error #{i}"));
        assert_eq!(t.df_error, c["df_error"].as_f64().unwrap());
        for (row, want) in t.rows.iter().zip(c["effects"].as_array().unwrap()) {
            let tag = format!("{} #{i}", row.effect);
            assert_eq!(row.effect, want["effect"].as_str().unwrap());
            assert_eq!(row.df, want["df"].as_f64().unwrap());
            close(row.sum_sq, want["sum_sq"].as_f64().unwrap(), 1e-8, &tag);
            close(row.f, want["f"].as_f64().unwrap(), 1e-8, &tag);
            close(row.p_value, want["p"].as_f64().unwrap(), 1e-6, &tag);
            close(row.partial_eta_sq, want["partial_eta_sq"].as_f64().unwrap(), 1e-8, &tag);
        }
    }
}

#[test]
fn tukey_matches_reference() {
    for (n, c) in fixture("tukey").iter().enumerate() {
        let groups: Vec<(String, Vec<f64>)> = c["groups"]
            .as_array()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, g)| (format!("g{i}"), floats(g)))
            .collect();
        let res = tukey_hsd(&groups, 0.05).unwrap();
        let pairs = c["pairs"].as_array().unwrap();
        assert_eq!(res.len(), pairs.len());
        for (r, want) in res.iter().zip(pairs) {
            let tag = format!("{} #{n}", r.label);
            assert_eq!(r.label, format!("g{}-g{}", want["i"], want["j"]));
            close(r.estimate.unwrap(), want["diff"].as_f64().unwrap(), 1e-10, &tag);
            close(r.p_value.unwrap(), want["p"].as_f64().unwrap(), 1e-6, &tag);
            let ci = r.ci.unwrap();
            close(ci.low, want["low"].as_f64().unwrap(), 1e-6, &tag);
            close(ci.high, want["high"].as_f64().unwrap(), 1e-6, &tag);
        }
    }
}

#[test]
fn cohens_d_matches_reference() {
    for (i, c) in fixture("cohens_d").iter().enumerate() {
        let r = cohens_d(&floats(&c["x"]), &floats(&c["y"]), 0.95, 200, 7).unwrap();
        let Some(Effect::D(d)) = r.effect else { panic!("no effect size") };
        close(d, c["d"].as_f64().unwrap(), 1e-10, &format!("d #{i}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bootstrap_interval_contains_point_estimate(
        x in prop::collection::vec(-10.0f64..10.0, 4..20),
        y in prop::collection::vec(-10.0f64..10.0, 4..20),
        seed in any::<u64>(),
    ) {
        let r = cohens_d(&x, &y, 0.95, 500, seed).unwrap();
        let Some(Effect::D(d)) = r.effect else { panic!("no effect size") };
        let ci = r.ci.unwrap();
        prop_assert!(ci.low <= ci.high);
        prop_assert!(ci.low <= d + 1e-12 && d <= ci.high + 1e-12, "{d} outside [{}, {}]", ci.low, ci.high);
    }
}
