use casorati_core::expr::parse::parse_expr;
use casorati_core::roots::{locate_divisor, Disc};

fn main() {
    let f = parse_expr("1 / gamma(z)").unwrap();
    let d = Disc::centered(12.0).unwrap();
    match locate_divisor(&f, &d, 1e-9) {
        Ok(div) => println!("ok {} entries", div.entries.len()),
        Err(e) => println!("ERR {e}"),
    }
}
