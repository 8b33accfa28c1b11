//! Drives the three browser exports natively and prints their JSON, so the
//! binding layer can be exercised end to end without a wasm toolchain:
//!
//! ```sh
//! cargo run -p radbound-wasm --example smoke
//! ```

fn main() {
    for (name, doc) in [
        ("chain_explorer", radbound_wasm::chain_explorer("1,2,-1,3,1,-2", 6)),
        ("hypergeom_profile", radbound_wasm::hypergeom_profile(10, 6)),
        ("maurey_curve", radbound_wasm::maurey_curve("1,-1,2,-2,1,-1", "", 8)),
    ] {
        match doc {
            Ok(json) => println!("{name}: {json}"),
            Err(e) => {
                eprintln!("{name} failed: {e}");
                std::process::exit(1);
            }
        }
    }
}
