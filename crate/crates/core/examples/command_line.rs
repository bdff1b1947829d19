//! Drives the command-line front end in-process, as the `ekpme` binary does.
//!
//! `cargo run --release --example command_line [out_dir]`

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let profile = format!("{dir}/cli_profile.csv");
    let runs: [Vec<&str>; 3] = [
        vec!["ekpme", "solve", "--alpha", "0.5", "--diff", "power:m=2", "--n", "128", "--out", &profile],
        vec!["ekpme", "ek-error", "--h", "2^-4..2^-7", "--rule", "rect", "--out", &dir],
        vec!["ekpme", "solve", "--alpha", "1.2"],
    ];
    for args in runs {
        println!("$ {}", args.join(" "));
        let code = ekpme::cli::run(args);
        println!("exit code {code}\n");
    }
}
