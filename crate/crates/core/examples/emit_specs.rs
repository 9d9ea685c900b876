//! Prints a built-in link specification as JSON, for generating the example
//! spec files shipped in docs/examples.
//!
//! Usage: emit_specs <unlinks> <hopfs>

use linkmotion::catalog::htrivial;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let m: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = htrivial(n, m).expect("n + m must be at least 1");
    println!("{}", spec.to_json());
}
