use casorati_core::expr::parse::parse_expr;
use casorati_core::roots::{locate_divisor, Disc};

fn main() {
    let f = parse_expr("1 / gamma(z)").unwrap();
    for r in [11.5, 12.0, 12.3] {
        let d = Disc::centered(r).unwrap();
        match locate_divisor(&f, &d, 1e-9) {
            Ok(div) => println!("r={r}: {} zeros {} poles", div.total(casorati_core::roots::PointKind::Zero), div.total(casorati_core::roots::PointKind::Pole)),
            Err(e) => println!("r={r}: ERR {e}"),
        }
    }
}
