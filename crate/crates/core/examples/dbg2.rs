use casorati_core::expr::parse::parse_expr;
use casorati_core::expr::rationalize;
use casorati_core::roots::value_and_deriv_log;
use num_complex::Complex64;

fn main() {
    let f = parse_expr("1 / gamma(z)").unwrap();
    let (num, den) = rationalize(&f).unwrap();
    println!("num = {num}, den = {den}");
    // probe the pair evaluator near the boundary zero at -12
    for &(re, im) in &[(-12.000012f64, 0.0f64), (-12.0, 1e-7), (-11.999988, 0.0), (-12.0, 0.0)] {
        let z = Complex64::new(re, im);
        match value_and_deriv_log(&num, z) {
            Ok((v, d)) => println!("z={z}: v.log={:.6} d.log={:.6} ratio={:?}", v.log_abs, d.log_abs, d.div(v).to_c64()),
            Err(e) => println!("z={z}: ERR {e}"),
        }
    }
}
