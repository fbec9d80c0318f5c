fn main() {
    for name in chowkit::scenario::BUILTIN_NAMES {
        println!("================ {} ================", name);
        match chowkit::scenario::run_builtin(name) {
            Ok(report) => print!("{}", report.render_text()),
            Err(e) => println!("ERROR: {}", e),
        }
    }
}
