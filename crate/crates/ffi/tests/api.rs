use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use risklab_ffi::*;

fn last_error() -> String {
    let p = risklab_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn simulate(n: usize) -> *mut RisklabDataset {
    let mut data = ptr::null_mut();
    assert_eq!(unsafe { risklab_dataset_simulate(n, 20220101, 0.0, &mut data) }, RisklabStatus::Ok);
    data
}

#[test]
fn glm_round_trip_through_handles() {
    let data = simulate(1000);
    unsafe {
        assert_eq!(risklab_dataset_rows(data), 1000);
        assert_eq!(risklab_dataset_cols(data), 6);
        let mut fit = ptr::null_mut();
        assert_eq!(risklab_glm_fit(data, RisklabPenalty::None, 0.0, &mut fit), RisklabStatus::Ok);
        assert_eq!(risklab_glm_coefficient_count(fit), 7);
        let mut coef = [0.0; 7];
        assert_eq!(risklab_glm_coefficients(fit, coef.as_mut_ptr(), 7), RisklabStatus::Ok);
        assert!((coef[2] - 2.0).abs() < 0.5, "{coef:?}");

        let (mut se, mut p) = ([0.0; 7], [0.0; 7]);
        assert_eq!(risklab_glm_inference(fit, se.as_mut_ptr(), p.as_mut_ptr(), 7), RisklabStatus::Ok);
        assert!(p[2] < 1e-6 && se.iter().all(|s| *s > 0.0));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("glm.model").to_str().unwrap()).unwrap();
        assert_eq!(risklab_glm_save(fit, path.as_ptr()), RisklabStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(risklab_glm_load(path.as_ptr(), &mut loaded), RisklabStatus::Ok);
        let (mut a, mut b) = (vec![0.0; 1000], vec![0.0; 1000]);
        assert_eq!(risklab_glm_predict(fit, data, a.as_mut_ptr(), 1000), RisklabStatus::Ok);
        assert_eq!(risklab_glm_predict(loaded, data, b.as_mut_ptr(), 1000), RisklabStatus::Ok);
        assert_eq!(a, b);

        risklab_glm_free(loaded);
        risklab_glm_free(fit);
        risklab_dataset_free(data);
    }
}

#[test]
fn network_training_and_garson() {
    let data = simulate(500);
    unsafe {
        let mut options = risklab_nn_default_options();
        options.epochs = 30;
        let mut model = ptr::null_mut();
        assert_eq!(risklab_nn_train(data, &options, &mut model), RisklabStatus::Ok);
        let mut scores = [0.0; 6];
        assert_eq!(risklab_nn_garson(model, scores.as_mut_ptr(), 6), RisklabStatus::Ok);
        assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let mut probs = vec![0.0; 500];
        assert_eq!(risklab_nn_predict(model, data, probs.as_mut_ptr(), 500), RisklabStatus::Ok);
        assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("nn.model").to_str().unwrap()).unwrap();
        assert_eq!(risklab_nn_save(model, path.as_ptr()), RisklabStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(risklab_nn_load(path.as_ptr(), &mut loaded), RisklabStatus::Ok);
        let mut again = vec![0.0; 500];
        assert_eq!(risklab_nn_predict(loaded, data, again.as_mut_ptr(), 500), RisklabStatus::Ok);
        assert_eq!(probs, again);

        // two hidden layers are outside Garson's method
        let hidden = [3usize, 2];
        options.hidden = hidden.as_ptr();
        options.hidden_len = 2;
        let mut deep = ptr::null_mut();
        assert_eq!(risklab_nn_train(data, &options, &mut deep), RisklabStatus::Ok);
        assert_eq!(risklab_nn_garson(deep, scores.as_mut_ptr(), 6), RisklabStatus::Config);
        assert!(last_error().contains("hidden layer"));

        risklab_nn_free(deep);
        risklab_nn_free(loaded);
        risklab_nn_free(model);
        risklab_dataset_free(data);
    }
}

#[test]
fn statuses_and_messages() {
    unsafe {
        let mut data = ptr::null_mut();
        assert_eq!(risklab_dataset_simulate(0, 1, 0.0, &mut data), RisklabStatus::Config);
        assert!(data.is_null());
        assert!(last_error().contains("at least 1"));

        assert_eq!(risklab_dataset_simulate(10, 1, 0.0, ptr::null_mut()), RisklabStatus::NullPointer);
        assert_eq!(risklab_glm_fit(ptr::null(), RisklabPenalty::None, 0.0, &mut ptr::null_mut()), RisklabStatus::NullPointer);

        let missing = CString::new("/nonexistent/cohort.csv").unwrap();
        assert_eq!(risklab_dataset_read_csv(missing.as_ptr(), &mut data), RisklabStatus::Io);
        assert!(last_error().contains("/nonexistent/cohort.csv"));

        let data = simulate(200);
        let mut fit = ptr::null_mut();
        assert_eq!(risklab_glm_fit(data, RisklabPenalty::Ridge, 1.0, &mut fit), RisklabStatus::Ok);
        let mut short = [0.0; 3];
        assert_eq!(risklab_glm_coefficients(fit, short.as_mut_ptr(), 3), RisklabStatus::BufferTooSmall);
        let (mut se, mut p) = ([0.0; 7], [0.0; 7]);
        assert_eq!(risklab_glm_inference(fit, se.as_mut_ptr(), p.as_mut_ptr(), 7), RisklabStatus::Config);
        assert!(last_error().contains("unpenalized"));

        // a successful call clears the message
        assert_eq!(risklab_dataset_rows(data), 200);
        let mut coef = [0.0; 7];
        assert_eq!(risklab_glm_coefficients(fit, coef.as_mut_ptr(), 7), RisklabStatus::Ok);
        assert!(risklab_last_error().is_null());

        risklab_glm_free(fit);
        risklab_dataset_free(data);
        risklab_dataset_free(ptr::null_mut());
    }
}

#[test]
fn dataset_from_rows_and_csv() {
    let x = [0.0, 1.0, 1.0, 0.5, 2.0, -1.0];
    let y = [0u8, 1, 1];
    let a = CString::new("age").unwrap();
    let b = CString::new("dose").unwrap();
    let names = [a.as_ptr(), b.as_ptr()];
    unsafe {
        let mut data = ptr::null_mut();
        assert_eq!(
            risklab_dataset_from_rows(x.as_ptr(), 3, 2, y.as_ptr(), names.as_ptr(), &mut data),
            RisklabStatus::Ok
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let c_path = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(risklab_dataset_write_csv(data, c_path.as_ptr()), RisklabStatus::Ok);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "age,dose,label\n0,1,0\n1,0.5,1\n2,-1,1\n");

        let bad = [0u8, 2, 1];
        let mut other = ptr::null_mut();
        assert_ne!(
            risklab_dataset_from_rows(x.as_ptr(), 3, 2, bad.as_ptr(), ptr::null(), &mut other),
            RisklabStatus::Ok
        );
        risklab_dataset_free(data);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/risklab.h");
    assert!(header.is_file(), "header not generated");
    let lib = target_dir().join("librisklab_ffi.a");
    assert!(lib.is_file(), "static library missing at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .expect("a C compiler is required for this test");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("x2 "));
}
