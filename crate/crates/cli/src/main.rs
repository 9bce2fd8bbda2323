use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let analysis = args.get(1).cloned().unwrap_or_default();
    let result = volspill::from_args(&args).and_then(|(_, config)| volspill::run(&config).map(|p| (config, p)));
    match result {
        Ok((config, paths)) => {
            println!("wrote {} files to {}", paths.len(), config.output.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                if !clap_err.use_stderr() {
                    let _ = clap_err.print();
                    return ExitCode::SUCCESS;
                }
            }
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let line = serde_json::json!({
                "error": chain.join(": "),
                "analysis": analysis,
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
