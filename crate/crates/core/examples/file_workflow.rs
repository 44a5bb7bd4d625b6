//! The file-based workflow behind the `llp` tool: ingest a text edge list
//! with arbitrary ids, order it, compress it and read the reports back.

use std::io::Write;

use llp_core::codec::CodecConfig;
use llp_core::llp::LlpConfig;
use llp_core::pipeline::{self, IdMapPolicy, OrderMethod, Report};

fn main() -> llp_core::Result<()> {
    let dir = std::env::temp_dir().join("llp_file_workflow");
    std::fs::create_dir_all(&dir)?;
    let edges = dir.join("edges.txt");
    let mut f = std::fs::File::create(&edges)?;
    writeln!(f, "# a tiny web: two sites linked once")?;
    for site in ["a.org", "b.net"] {
        for i in 0..6 {
            for j in 0..6 {
                if i != j && (i + j) % 3 != 0 {
                    writeln!(f, "{site}/{i} {site}/{j}")?;
                }
            }
        }
    }
    writeln!(f, "a.org/0 b.net/0")?;
    drop(f);

    let graph = dir.join("graph.bin");
    let (_, ingest) = pipeline::cmd_ingest(&edges, &graph, IdMapPolicy::Intern)?;
    let perm = dir.join("llp.perm");
    let order = pipeline::cmd_order(&graph, &OrderMethod::Llp(LlpConfig::default()), &perm)?;
    let compressed = dir.join("graph.bvg");
    let compress = pipeline::cmd_compress(&graph, Some(&perm), &CodecConfig::default(), &compressed)?;

    // Hosts from the interned id map.
    let hosts: String = std::fs::read_to_string(pipeline::sidecar_path(&graph, "ids"))?
        .lines()
        .map(|id| format!("{}\n", id.split('/').next().unwrap_or(id)))
        .collect();
    let host_file = dir.join("hosts.txt");
    std::fs::write(&host_file, hosts)?;
    let hoststats = pipeline::cmd_hoststats(&host_file, &perm)?;

    let log = dir.join("reports.kv");
    let _ = std::fs::remove_file(&log);
    for r in [&ingest, &order, &compress, &hoststats] {
        r.append_to(&log)?;
    }
    for r in Report::parse_all(std::fs::File::open(&log)?)? {
        let keys: Vec<&str> = r.entries().iter().map(|(k, _)| k.as_str()).take(6).collect();
        println!("{}: {}", r.get("command").unwrap_or("?"), keys.join(" "));
    }
    println!("bits/link {}", compress.get("bits_per_link").unwrap_or("?"));
    println!(
        "host transition rate {}",
        hoststats.get("host_transition_rate").unwrap_or("?")
    );
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
