use std::ffi::CStr;
use std::ptr;

use rkhs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rkhs_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn gauss_hermite_round_trip() {
    unsafe {
        let mut rule = ptr::null_mut();
        assert_eq!(rkhs_rule_gauss_hermite(3, &mut rule), RkhsStatus::Ok);
        assert_eq!((rkhs_rule_len(rule), rkhs_rule_dim(rule)), (3, 1));
        let mut w = [0.0; 3];
        assert_eq!(rkhs_rule_weights(rule, w.as_mut_ptr(), 3), RkhsStatus::Ok);
        for (got, want) in w.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let mut x = [0.0; 2];
        assert_eq!(rkhs_rule_nodes(rule, x.as_mut_ptr(), 2), RkhsStatus::BufferTooSmall);
        assert!(last_error().contains("3 needed"));
        rkhs_rule_free(rule);
    }
}

#[test]
fn errors_and_transference() {
    unsafe {
        let sigma = [0.5f64.sqrt()];
        let mut g = ptr::null_mut();
        assert_eq!(rkhs_kernel_gaussian(sigma.as_ptr(), 1, &mut g), RkhsStatus::Ok);
        let mut e0 = 0.0;
        assert_eq!(rkhs_initial_error(g, RkhsProblem::Integration, &mut e0), RkhsStatus::Ok);
        assert!((e0 - 3f64.powf(-0.25)).abs() < 1e-15);

        let (nodes, weights) = ([0.0], [0.5f64.sqrt()]);
        let mut a = ptr::null_mut();
        assert_eq!(rkhs_rule_new(nodes.as_ptr(), weights.as_ptr(), 1, 1, &mut a), RkhsStatus::Ok);
        let mut e = 0.0;
        assert_eq!(rkhs_wce_integration(a, g, &mut e), RkhsStatus::Ok);
        assert!((e - 0.278_119_17).abs() < 1e-8);

        let mut b = ptr::null_mut();
        assert_eq!(rkhs_transfer_to_hermite(a, sigma.as_ptr(), 1, &mut b), RkhsStatus::Ok);
        let beta = [0.5];
        let mut h = ptr::null_mut();
        assert_eq!(rkhs_kernel_hermite(beta.as_ptr(), 1, &mut h), RkhsStatus::Ok);
        let mut eb = 0.0;
        assert_eq!(rkhs_wce_integration(b, h, &mut eb), RkhsStatus::Ok);
        assert!((e - 3f64.powf(-0.25) * eb).abs() < 1e-14);

        let mut back = ptr::null_mut();
        assert_eq!(rkhs_transfer_to_gaussian(b, sigma.as_ptr(), 1, &mut back), RkhsStatus::Ok);
        let mut w = [0.0];
        rkhs_rule_weights(back, w.as_mut_ptr(), 1);
        assert!((w[0] - weights[0]).abs() < 1e-15);

        let mut opt = ptr::null_mut();
        let mut e2 = 0.0;
        assert_eq!(rkhs_optimal_weights(a, h, &mut opt, &mut e2), RkhsStatus::Ok);
        assert!((e2 - (1.0 - 0.75f64.sqrt())).abs() < 1e-12);

        assert_eq!(rkhs_wce_integration(a, ptr::null(), &mut e), RkhsStatus::NullPointer);
        let two = [0.5, 0.5];
        let mut h2 = ptr::null_mut();
        rkhs_kernel_hermite(two.as_ptr(), 2, &mut h2);
        assert_eq!(rkhs_kernel_dimension(h2), 2);
        assert_eq!(rkhs_wce_integration(a, h2, &mut e), RkhsStatus::Shape);
        assert!(last_error().contains("dimension"));
        let bad = [1.5];
        let mut k = ptr::null_mut();
        assert_eq!(rkhs_kernel_hermite(bad.as_ptr(), 1, &mut k), RkhsStatus::Domain);
        assert!(k.is_null());

        for r in [a, b, back, opt] {
            rkhs_rule_free(r);
        }
        for k in [g, h, h2] {
            rkhs_kernel_free(k);
        }
        rkhs_rule_free(ptr::null_mut());
    }
}
