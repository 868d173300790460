use pflab::config::parse_config;
use pflab::experiments::run_scenario;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "fig2".into());
    let text = std::fs::read_to_string(format!("configs/atom-{which}.toml"))
        .or_else(|_| std::fs::read_to_string(format!("configs/{which}.toml")))
        .unwrap();
    let lambda_override = std::env::args().nth(2);
    let text = match lambda_override {
        Some(l) => text.replace("lambda = 0.1", &format!("lambda = {l}")),
        None => text,
    };
    let cfg = parse_config(&text).unwrap();
    let t0 = std::time::Instant::now();
    let out = run_scenario(&cfg).unwrap();
    println!("== {} in {:.1?}", out.name, t0.elapsed());
    println!("columns: {:?}", out.table.columns);
    for row in &out.table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
        println!("  {}", cells.join("  "));
    }
    if let Some(s) = &out.summary {
        println!("summary cols: {:?} ({} rows)", s.columns, s.rows.len());
        for (i, row) in s.rows.iter().enumerate() {
            if i < 4 || i + 3 > s.rows.len() {
                let lab = s.row_labels.as_ref().map(|l| l[i].clone()).unwrap_or_default();
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
                println!("  {lab} {}", cells.join("  "));
            }
        }
    }
    println!("extras: {}", serde_json::to_string_pretty(&out.extras).unwrap());
    let uncert = out.records.iter().filter(|r| r.certificate.map_or(false, |c| !c.certified)).count();
    println!("uncertified records: {uncert}/{}", out.records.len());
}
