use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use finlab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(finlab_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn model_probability_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(
            finlab_model_load(c("table41").as_ptr(), &mut m),
            FinlabStatus::Ok
        );
        let (mut s, mut a, mut o) = (0, 0, 0);
        assert_eq!(
            finlab_model_dims(m, &mut s, &mut a, &mut o),
            FinlabStatus::Ok
        );
        assert_eq!((s, a, o), (2, 2, 2));
        let acts = [0usize, 0, 1];
        let obs = [1usize, 0, 1];
        let mut p = 0.0;
        assert_eq!(
            finlab_model_history_probability(m, acts.as_ptr(), obs.as_ptr(), 3, &mut p),
            FinlabStatus::Ok
        );
        assert!((p - 0.224).abs() < 1e-12);
        finlab_model_free(m);

        let mut b = ptr::null_mut();
        assert_eq!(
            finlab_model_load(c("bernoulli:0.8").as_ptr(), &mut b),
            FinlabStatus::Ok
        );
        assert_eq!(
            finlab_model_history_probability(b, acts.as_ptr(), obs.as_ptr(), 3, &mut p),
            FinlabStatus::Ok
        );
        assert!((p - 0.128).abs() < 1e-12);
        finlab_model_free(b);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(
            finlab_model_load(c("no-such-model").as_ptr(), &mut m),
            FinlabStatus::InvalidArgument
        );
        assert!(m.is_null());
        assert!(last_error().contains("no-such-model"));

        assert_eq!(
            finlab_model_load(ptr::null(), &mut m),
            FinlabStatus::NullPointer
        );
        assert_eq!(
            finlab_model_parse(c("garbage here").as_ptr(), &mut m),
            FinlabStatus::Parse
        );

        assert_eq!(
            finlab_model_load(c("table41").as_ptr(), &mut m),
            FinlabStatus::Ok
        );
        let mut p = 0.0;
        let bad = [5usize];
        assert_eq!(
            finlab_model_history_probability(m, bad.as_ptr(), bad.as_ptr(), 1, &mut p),
            FinlabStatus::InvalidArgument
        );
        assert_eq!(
            finlab_model_history_probability(m, ptr::null(), ptr::null(), 1, &mut p),
            FinlabStatus::NullPointer
        );
        finlab_model_free(m);
        finlab_model_free(ptr::null_mut());
    }
}

#[test]
fn best_action_prefers_rewarded_action() {
    // Action 1 always yields reward 1, action 0 never does.
    let src =
        "model table\nstates 1\nactions 2\nobservations 2\nstart 0\nrow 0 0 1 0\nrow 0 1 0 1\n";
    unsafe {
        let mut m = ptr::null_mut();
        let st = finlab_model_parse(c(src).as_ptr(), &mut m);
        assert_eq!(st, FinlabStatus::Ok, "{}", last_error());
        let grid = [0.0, 1.0];
        let mut a = 9;
        let st = finlab_model_best_action(
            m,
            ptr::null(),
            ptr::null(),
            0,
            grid.as_ptr(),
            2,
            0.9,
            2,
            &mut a,
        );
        assert_eq!(st, FinlabStatus::Ok, "{}", last_error());
        assert_eq!(a, 1);
        assert_eq!(
            finlab_model_best_action(
                m,
                ptr::null(),
                ptr::null(),
                0,
                grid.as_ptr(),
                2,
                1.5,
                2,
                &mut a
            ),
            FinlabStatus::InvalidArgument
        );
        finlab_model_free(m);
    }
}

#[test]
fn decide_in_gf3() {
    unsafe {
        let g = finlab_interpretation_gf3();
        let mut v = false;
        let st = finlab_decide(g, c("forall x. exists y. ((x + y) = 0)").as_ptr(), &mut v);
        assert_eq!(st, FinlabStatus::Ok, "{}", last_error());
        assert!(v);
        assert_eq!(
            finlab_decide(g, c("forall x. ((x * x) = x)").as_ptr(), &mut v),
            FinlabStatus::Ok
        );
        assert!(!v);
        assert_eq!(
            finlab_decide(g, c("forall x. (x = ").as_ptr(), &mut v),
            FinlabStatus::Parse
        );
        finlab_interpretation_free(g);
    }
}

#[test]
fn aggregates() {
    let v = [0.2, 0.8];
    let mut r = 0.0;
    unsafe {
        assert_eq!(
            finlab_aggregate(
                v.as_ptr(),
                ptr::null(),
                ptr::null(),
                2,
                FinlabAggregate::Mean,
                &mut r
            ),
            FinlabStatus::Ok
        );
        assert!((r - 0.5).abs() < 1e-12);
        assert_eq!(
            finlab_aggregate(
                v.as_ptr(),
                ptr::null(),
                ptr::null(),
                2,
                FinlabAggregate::Maximin,
                &mut r
            ),
            FinlabStatus::Ok
        );
        assert!((r - 0.2).abs() < 1e-12);
        let w = [0.25, 0.75];
        assert_eq!(
            finlab_aggregate(
                v.as_ptr(),
                ptr::null(),
                w.as_ptr(),
                2,
                FinlabAggregate::Weighted,
                &mut r
            ),
            FinlabStatus::Ok
        );
        assert!((r - 0.65).abs() < 1e-12);
        assert_eq!(
            finlab_aggregate(
                v.as_ptr(),
                ptr::null(),
                ptr::null(),
                0,
                FinlabAggregate::Mean,
                &mut r
            ),
            FinlabStatus::InvalidArgument
        );
    }
}

#[test]
fn experiment_report() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(
            finlab_experiment_run(c("hitman").as_ptr(), ptr::null(), &mut r),
            FinlabStatus::Ok
        );
        assert!(finlab_report_all_pass(r));
        let mut x = 0.0;
        assert_eq!(
            finlab_report_metric(r, c("shoot").as_ptr(), &mut x),
            FinlabStatus::Ok
        );
        assert!((x - 0.764).abs() < 1e-12);
        assert_eq!(
            finlab_report_metric(r, c("nope").as_ptr(), &mut x),
            FinlabStatus::InvalidArgument
        );

        let mut json = ptr::null_mut();
        assert_eq!(finlab_report_json(r, &mut json), FinlabStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        finlab_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["experiment"], "hitman");

        let dir = std::env::temp_dir().join(format!("finlab-ffi-{}", std::process::id()));
        let d = c(dir.to_str().unwrap());
        assert_eq!(finlab_report_emit(r, d.as_ptr()), FinlabStatus::Ok);
        assert!(dir.join("report.json").exists());
        assert!(dir.join("metrics.csv").exists());
        std::fs::remove_dir_all(&dir).unwrap();
        finlab_report_free(r);

        let cfg = c(r#"{"alpha": 0.9, "steps": 50}"#);
        assert_eq!(
            finlab_experiment_run(c("delusion63").as_ptr(), cfg.as_ptr(), &mut r),
            FinlabStatus::Ok
        );
        finlab_report_free(r);
        assert_eq!(
            finlab_experiment_run(c("delusion63").as_ptr(), c("{").as_ptr(), &mut r),
            FinlabStatus::Parse
        );
        assert_eq!(
            finlab_experiment_run(c("nothing").as_ptr(), ptr::null(), &mut r),
            FinlabStatus::InvalidArgument
        );
        assert!(!finlab_report_all_pass(ptr::null()));
    }
}

#[test]
fn header_declares_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/finlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "finlab_last_error",
        "finlab_model_load",
        "finlab_model_best_action",
        "finlab_decide",
        "finlab_aggregate",
        "finlab_experiment_run",
        "finlab_report_emit",
        "FINLAB_STATUS_RESOURCE_CAP",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Syntax-check as C when a compiler is present.
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99"])
        .arg(&header)
        .output()
    {
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
