use stackdet_core::detector::external_score;
use stackdet_core::{Detector, Error, ExternalDetector};

fn sh(script: &str) -> ExternalDetector {
    ExternalDetector::new("sh", ["-c", script])
}

#[test]
fn scores_each_line_in_order() {
    let d = sh("n=0; while IFS= read -r line; do n=$((n+1)); echo \"0.$n\"; done");
    let batch = external_score(&d, &["a", "b\nwith newline", "c"]).unwrap();
    let v: Vec<f64> = batch.scores.iter().map(|s| s.value()).collect();
    assert_eq!(v, vec![0.1, 0.2, 0.3]);
    assert!(batch.clamped.is_empty());
    assert_eq!(d.score("x").unwrap().value(), 0.1);
}

#[test]
fn constant_adapter() {
    let d = sh("while IFS= read -r line; do echo 0.5; done");
    let s = d.score_batch(&["one", "two"]).unwrap();
    assert!(s.iter().all(|x| x.value() == 0.5));
}

#[test]
fn out_of_range_scores_are_clamped_and_recorded() {
    let d = sh("while IFS= read -r line; do echo 1.3; done");
    let batch = external_score(&d, &["t"]).unwrap();
    assert_eq!(batch.scores[0].value(), 1.0);
    assert_eq!(batch.clamped.len(), 1);
    assert_eq!(batch.clamped[0].index, 0);
    assert_eq!(batch.clamped[0].raw, 1.3);
}

#[test]
fn count_mismatch_is_a_protocol_error() {
    let d = sh("cat > /dev/null; echo 0.5");
    let err = external_score(&d, &["a", "b"]).unwrap_err();
    assert!(matches!(err, Error::AdapterProtocol(_)), "{err}");
}

#[test]
fn failing_adapter_is_a_protocol_error() {
    let d = sh("cat > /dev/null; echo boom >&2; exit 3");
    let err = external_score(&d, &["a"]).unwrap_err();
    assert!(matches!(err, Error::AdapterProtocol(_)), "{err}");
}

#[test]
fn unparsable_and_nan_outputs_are_rejected() {
    for out in ["abc", "NaN"] {
        let d = sh(&format!("cat > /dev/null; echo {out}"));
        let err = external_score(&d, &["a"]).unwrap_err();
        assert!(matches!(err, Error::AdapterProtocol(_)), "{out}: {err}");
    }
}

#[test]
fn missing_program_fails() {
    let d = ExternalDetector::new("/nonexistent/adapter-binary", Vec::<String>::new());
    assert!(external_score(&d, &["a"]).is_err());
}
