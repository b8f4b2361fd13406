use serde_json::json;
use zonalflow::experiments::{find, Params};

fn params(value: serde_json::Value) -> Params {
    value.as_object().unwrap().clone()
}

fn render(id: &str, p: &Params) -> String {
    serde_json::to_string(&find(id).unwrap().run(p).unwrap()).unwrap()
}

#[test]
fn randomized_runs_repeat_exactly() {
    let p = params(json!({"k_values": [8, 16, 32, 64, 128], "trials": 4, "seed": 7}));
    assert_eq!(render("exp_zygmund_s1", &p), render("exp_zygmund_s1", &p));
    let p = params(json!({"n_values": [8, 16, 32, 64, 128], "trials": 3, "seed": 11}));
    assert_eq!(render("exp_strichartz_l6", &p), render("exp_strichartz_l6", &p));
}

#[test]
fn seeds_change_randomized_output() {
    let a = params(json!({"k_values": [8, 16, 32, 64, 128], "trials": 2, "seed": 1}));
    let b = params(json!({"k_values": [8, 16, 32, 64, 128], "trials": 2, "seed": 2}));
    assert_ne!(render("exp_zygmund_s1", &a), render("exp_zygmund_s1", &b));
}

#[test]
fn thread_count_does_not_change_output() {
    let p = params(json!({"k_values": [8, 16, 32, 64, 128], "trials": 6, "seed": 3}));
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| render("exp_zygmund_s1", &p));
    let three =
        rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| render("exp_zygmund_s1", &p));
    assert_eq!(one, three);
}
