use std::ffi::{c_char, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use conic_approx_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let len = unsafe { ca_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..len.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn jacobi_values_and_parameter_errors() {
    let mut v = 0.0;
    assert_eq!(unsafe { ca_jacobi_eval(0.0, 0.0, 2, 0.5, &mut v) }, CaStatus::Ok);
    assert!((v - (-0.125)).abs() < 1e-14);
    assert_eq!(unsafe { ca_jacobi_eval(-2.0, 0.0, 2, 0.5, &mut v) }, CaStatus::ParameterDomain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { ca_jacobi_eval(0.0, 0.0, 2, 0.5, ptr::null_mut()) }, CaStatus::NullPointer);
    assert_eq!(last_error(), "result is null");
}

#[test]
fn error_message_truncates_to_buffer() {
    let mut v = 0.0;
    unsafe { ca_jacobi_eval(0.0, 0.0, 1, 0.0, ptr::null_mut()) };
    let mut buf = [1 as c_char; 5];
    let len = unsafe { ca_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(len, "result is null".len());
    assert_eq!(buf[4], 0);
    assert_eq!(buf[..4].iter().map(|&c| c as u8).collect::<Vec<_>>(), b"resu");
    assert_eq!(unsafe { ca_jacobi_eval(0.0, 0.0, 1, 0.25, &mut v) }, CaStatus::Ok);
}

#[test]
fn gauss_legendre_integrates_quadratics() {
    let (mut nodes, mut weights) = ([0.0; 3], [0.0; 3]);
    let s = unsafe { ca_gauss_jacobi(0.0, 0.0, 3, nodes.as_mut_ptr(), weights.as_mut_ptr()) };
    assert_eq!(s, CaStatus::Ok);
    let mass: f64 = weights.iter().sum();
    let second: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
    assert!((second / mass - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn cutoffs_are_one_then_zero() {
    for c in [CaCutoff::ExponentialBump, CaCutoff::RaisedCosine] {
        assert_eq!(ca_cutoff_eval(c, 0.5), 1.0);
        assert_eq!(ca_cutoff_eval(c, 2.5), 0.0);
        let mid = ca_cutoff_eval(c, 1.5);
        assert!(mid > 0.0 && mid < 1.0);
    }
}

#[test]
fn kernel_backends_agree() {
    let mut kernels = [ptr::null_mut(); 2];
    for (k, b) in kernels.iter_mut().zip([CaKernelBackend::BasisSum, CaKernelBackend::AdditionFormula]) {
        assert_eq!(unsafe { ca_surface_kernel_new(2, 0.0, 6, CaCutoff::ExponentialBump, b, k) }, CaStatus::Ok);
    }
    let (xa, xb) = ([0.6, 0.8], [1.0, 0.0]);
    let mut v = [0.0; 2];
    for (k, v) in kernels.iter().zip(&mut v) {
        assert_eq!(unsafe { ca_surface_kernel_eval(*k, xa.as_ptr(), 0.3, xb.as_ptr(), 0.7, v) }, CaStatus::Ok);
    }
    assert!((v[0] - v[1]).abs() <= 1e-8 * v[0].abs().max(1.0), "{v:?}");
    let mut out = 0.0;
    let s = unsafe { ca_surface_kernel_eval(kernels[0], xa.as_ptr(), 1.5, xb.as_ptr(), 0.7, &mut out) };
    assert_eq!(s, CaStatus::Domain);
    for k in kernels {
        unsafe { ca_surface_kernel_free(k) };
    }
    unsafe { ca_surface_kernel_free(ptr::null_mut()) };
}

#[test]
fn operator_reproduces_low_degree_polynomials() {
    let d = 2;
    let f = |t: f64, xi: &[f64]| 1.0 + t * xi[0] - 2.0 * t * t + t * xi[1] * t * xi[0];
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { ca_surface_operator_new(d, 0.5, 4, CaCutoff::ExponentialBump, &mut op) }, CaStatus::Ok);
    let len = unsafe { ca_surface_operator_grid_len(op) };
    assert!(len > 0);
    let (mut t, mut xi) = (vec![0.0; len], vec![0.0; len * d]);
    assert_eq!(unsafe { ca_surface_operator_grid(op, t.as_mut_ptr(), xi.as_mut_ptr()) }, CaStatus::Ok);
    let values: Vec<f64> = (0..len).map(|k| f(t[k], &xi[k * d..(k + 1) * d])).collect();

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { ca_surface_operator_apply(op, values.as_ptr(), len - 1, &mut e) }, CaStatus::Configuration);
    assert_eq!(unsafe { ca_surface_operator_apply(op, values.as_ptr(), len, &mut e) }, CaStatus::Ok);
    for (t, xi) in [(0.25, [0.6, -0.8]), (0.9, [0.0, 1.0])] {
        let mut v = 0.0;
        assert_eq!(unsafe { ca_surface_expansion_eval(e, xi.as_ptr(), t, &mut v) }, CaStatus::Ok);
        assert!((v - f(t, &xi)).abs() < 1e-10, "{v} vs {}", f(t, &xi));
    }
    unsafe {
        ca_surface_expansion_free(e);
        ca_surface_operator_free(op);
    }
    assert_eq!(unsafe { ca_surface_operator_grid_len(ptr::null()) }, 0);
}

#[test]
fn run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let command = CString::new("verify").unwrap();
    let config = CString::new(r#"{"checks": ["jacobi_orthonormality"]}"#).unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut outcome = CaOutcome::NumericalFailure;
    let s = unsafe { ca_run(command.as_ptr(), config.as_ptr(), out_dir.as_ptr(), &mut outcome) };
    assert_eq!(s, CaStatus::Ok, "{}", last_error());
    assert_eq!(outcome, CaOutcome::Pass);
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("jacobi_orthonormality.csv").is_file());

    let bad = CString::new("plot").unwrap();
    assert_eq!(unsafe { ca_run(bad.as_ptr(), ptr::null(), out_dir.as_ptr(), &mut outcome) }, CaStatus::Usage);
    let unknown = CString::new(r#"{"colour": 1}"#).unwrap();
    let s = unsafe { ca_run(command.as_ptr(), unknown.as_ptr(), out_dir.as_ptr(), &mut outcome) };
    assert_ne!(s, CaStatus::Ok);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/conic_approx.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ca_run", "ca_surface_operator_apply", "CA_STATUS_PANIC", "typedef struct CaSurfaceKernel"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
