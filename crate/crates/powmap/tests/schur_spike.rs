use nalgebra::{Complex, DMatrix};

// Eigenangles of a complex unitary via Schur decomposition. This pins the
// numerical route used by the Monte Carlo samplers.
#[test]
fn complex_schur_recovers_unitary_eigenangles() {
    let n = 5usize;
    let thetas = [0.3f64, -1.2, 2.9, -2.4, 0.7];
    // Deterministic non-trivial unitary basis from QR of a fixed complex matrix.
    let a = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
        let x = ((i * 7 + j * 3 + 1) as f64).sin();
        let y = ((i * 5 + j * 11 + 2) as f64).cos();
        Complex::new(x, y)
    });
    let qr = a.qr();
    let q = qr.q();
    let d = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
        if i == j {
            Complex::from_polar(1.0, thetas[i])
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let u = &q * d * q.adjoint();

    let schur = u.clone().schur();
    let t = schur.unpack().1;
    let mut got: Vec<f64> = (0..n).map(|i| t[(i, i)].arg()).collect();
    let mut want = thetas.to_vec();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "got {got:?} want {want:?}");
    }
}
