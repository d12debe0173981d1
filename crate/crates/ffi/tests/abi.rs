use confboost_ffi::*;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let p = cb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn synthetic(n: usize) -> *mut CbDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { cb_dataset_synthetic(n, 3, 5, &mut ds) }, CbStatus::Ok);
    ds
}

#[test]
fn plain_training_round_trips_through_json() {
    let ds = synthetic(300);
    unsafe {
        assert_eq!((cb_dataset_n(ds), cb_dataset_k(ds)), (300, 3));
        let mut m = ptr::null_mut();
        assert_eq!(cb_train_plain(ds, CbBase::Rlc, 15, 1, &mut m), CbStatus::Ok);
        assert_eq!(cb_model_len(m), 15);
        assert!(cb_last_error_message().is_null());

        let mut json = ptr::null_mut();
        assert_eq!(cb_model_to_json(m, &mut json), CbStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(cb_model_from_json(json, &mut back), CbStatus::Ok);
        let x = [0.3, -1.0, 2.5];
        let (mut a, mut b) = (0i8, 0i8);
        assert_eq!(cb_model_predict(m, x.as_ptr(), 3, &mut a), CbStatus::Ok);
        assert_eq!(cb_model_predict(back, x.as_ptr(), 3, &mut b), CbStatus::Ok);
        assert_eq!(a, b);
        assert!(a == 1 || a == -1);

        cb_string_free(json);
        cb_model_free(back);
        cb_model_free(m);
        cb_dataset_free(ds);
    }
}

#[test]
fn secure_training_through_the_abi() {
    let ds = synthetic(24);
    unsafe {
        let mut m = ptr::null_mut();
        let s = cb_train_secure(ds, CbConstruction::SecshGc, 2, 0, 0, 0, &mut m);
        assert_eq!(s, CbStatus::Ok);
        assert_eq!(cb_model_len(m), 2);
        cb_model_free(m);
        cb_dataset_free(ds);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut ds = ptr::null_mut();
        let missing = CString::new("/no/such/file.csv").unwrap();
        let s = cb_dataset_load_csv(missing.as_ptr(), ptr::null(), ptr::null(), &mut ds);
        assert_eq!(s, CbStatus::Io);
        assert!(last_error().contains("/no/such/file.csv"));
        assert!(ds.is_null());

        assert_eq!(
            cb_dataset_load_csv(ptr::null(), ptr::null(), ptr::null(), &mut ds),
            CbStatus::NullArgument
        );
        assert_eq!(cb_dataset_synthetic(3, 3, 1, &mut ds), CbStatus::InvalidArgument);

        let ds = synthetic(50);
        let mut m = ptr::null_mut();
        assert_eq!(cb_train_plain(ds, CbBase::Stump, 3, 0, &mut m), CbStatus::Ok);
        let mut label = 0i8;
        let short = [1.0];
        assert_eq!(
            cb_model_predict(m, short.as_ptr(), 1, &mut label),
            CbStatus::InvalidArgument
        );
        let bad = CString::new("{").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(cb_model_from_json(bad.as_ptr(), &mut other), CbStatus::Training);
        cb_model_free(m);
        cb_dataset_free(ds);
        cb_model_free(ptr::null_mut());
        cb_dataset_free(ptr::null_mut());
    }
}

#[test]
fn csv_loading_through_the_abi() {
    let dir = tempfile_dir();
    let path = dir.join("t.csv");
    std::fs::write(&path, "a,b,y\n1,2,pos\n2,1,neg\n0,3,pos\n").unwrap();
    let p = CString::new(path.to_str().unwrap()).unwrap();
    let pos = CString::new("pos").unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(cb_dataset_load_csv(p.as_ptr(), ptr::null(), pos.as_ptr(), &mut ds), CbStatus::Ok);
        assert_eq!((cb_dataset_n(ds), cb_dataset_k(ds)), (3, 2));
        cb_dataset_free(ds);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("confboost-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn header_type_checks_with_a_c_compiler() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/confboost.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "cb_last_error_message",
        "cb_dataset_load_csv",
        "cb_train_plain",
        "cb_train_secure",
        "cb_model_predict",
        "cb_model_to_json",
        "cb_string_free",
        "CB_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(root.join("include"))
        .arg(root.join("examples/smoke.c"))
        .output()
        .expect("a C compiler is on PATH");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
