//! Network JSON and dataset CSV formats.
//!
//! Network files look like
//!
//! ```json
//! { "mpn_type": "CMPN", "epsilon": 0.1, "variables": ["A", "B"],
//!   "parents": [[], [0]],
//!   "cpds": [ { "child": 0, "rows": [0.7] }, { "child": 1, "rows": [0.05, 0.8] } ] }
//! ```
//!
//! Dataset files are a header of variable names followed by one line of
//! comma-separated 0/1 values per sample. Writers use `\n` line endings and
//! shortest round-trip float formatting, so load-then-save is byte-identical.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cpd, Dag, Dataset, MpnType, Network};

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    mpn_type: MpnType,
    epsilon: f64,
    variables: Vec<String>,
    parents: Vec<Vec<usize>>,
    cpds: Vec<CpdFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CpdFile {
    child: usize,
    rows: Vec<f64>,
}

pub fn network_to_json(network: &Network) -> String {
    let file = NetworkFile {
        mpn_type: network.mpn_type(),
        epsilon: network.epsilon(),
        variables: network.names().to_vec(),
        parents: network.dag().parent_sets().to_vec(),
        cpds: network
            .cpds()
            .iter()
            .map(|c| CpdFile {
                child: c.child,
                rows: c.rows.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("network serializes");
    s.push('\n');
    s
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let file: NetworkFile = serde_json::from_str(text)?;
    let dag = Dag::new(file.variables, file.parents)?;
    let mut cpds: Vec<Option<Cpd>> = vec![None; dag.n()];
    for c in file.cpds {
        if c.child >= dag.n() {
            return Err(Error::InvalidNetwork(format!(
                "CPD for unknown node {}",
                c.child
            )));
        }
        if cpds[c.child].is_some() {
            return Err(Error::InvalidNetwork(format!(
                "duplicate CPD for node {}",
                c.child
            )));
        }
        let parents = dag.parents(c.child).to_vec();
        cpds[c.child] = Some(Cpd::new(c.child, parents, c.rows)?);
    }
    let cpds = cpds
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::InvalidNetwork(format!("missing CPD for node {i}"))))
        .collect::<Result<Vec<_>>>()?;
    Network::new(dag, cpds, file.mpn_type, file.epsilon)
}

pub fn read_network(path: &Path) -> Result<Network> {
    network_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_network(path: &Path, network: &Network) -> Result<()> {
    std::fs::write(path, network_to_json(network))?;
    Ok(())
}

pub fn write_dataset_csv<W: Write>(mut out: W, dataset: &Dataset) -> Result<()> {
    let mut buf = String::with_capacity((dataset.m() + 1) * dataset.n() * 2);
    buf.push_str(&dataset.names().join(","));
    buf.push('\n');
    for sample in dataset.samples() {
        for (i, v) in sample.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            buf.push(if *v == 1 { '1' } else { '0' });
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn dataset_to_csv(dataset: &Dataset) -> String {
    let mut out = Vec::new();
    write_dataset_csv(&mut out, dataset).expect("writing to memory");
    String::from_utf8(out).expect("ascii output")
}

/// Parses a dataset; errors carry 1-based line and column numbers.
pub fn read_dataset_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing header".into(),
        });
    }
    if let Some(i) = names.iter().position(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            column: i + 1,
            message: "empty variable name".into(),
        });
    }
    let n = names.len();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != n {
            return Err(Error::Parse {
                line,
                column: record.len().min(n) + 1,
                message: format!("expected {n} fields, found {}", record.len()),
            });
        }
        for (i, field) in record.iter().enumerate() {
            let v = match field {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Parse {
                        line,
                        column: i + 1,
                        message: format!("expected 0 or 1, found `{other}`"),
                    })
                }
            };
            values.push(v);
        }
    }
    Dataset::from_flat(names, values)
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    read_dataset_csv(text.as_bytes())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_csv(std::fs::File::open(path)?)
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset_csv(std::io::BufWriter::new(file), dataset)
}

/// Graphviz rendering; each edge is labelled with its value in `labels`.
pub fn dag_to_dot(dag: &Dag, labels: &[((usize, usize), f64)]) -> String {
    let mut s = String::from("digraph mpn {\n");
    for name in dag.names() {
        s.push_str(&format!("  \"{}\";\n", escape(name)));
    }
    for (from, to) in dag.edges() {
        let label = labels
            .iter()
            .find(|(e, _)| *e == (from, to))
            .map(|(_, v)| format!(" [label=\"{v:.4}\"]"))
            .unwrap_or_default();
        s.push_str(&format!(
            "  \"{}\" -> \"{}\"{label};\n",
            escape(&dag.names()[from]),
            escape(&dag.names()[to])
        ));
    }
    s.push_str("}\n");
    s
}

fn escape(name: &str) -> String {
    name.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> Network {
        let dag = Dag::new(vec!["A".into(), "B".into()], vec![vec![], vec![0]]).unwrap();
        let cpds = vec![
            Cpd::new(0, vec![], vec![0.7]).unwrap(),
            Cpd::new(1, vec![0], vec![0.05, 0.8]).unwrap(),
        ];
        Network::new(dag, cpds, MpnType::Cmpn, 0.1).unwrap()
    }

    #[test]
    fn network_json_schema() {
        let json = network_to_json(&two_node());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["mpn_type"], "CMPN");
        assert_eq!(v["epsilon"], 0.1);
        assert_eq!(v["variables"][1], "B");
        assert_eq!(v["parents"][1][0], 0);
        assert_eq!(v["cpds"][1]["child"], 1);
        assert_eq!(v["cpds"][1]["rows"][1], 0.8);
        assert_eq!(network_from_json(&json).unwrap(), two_node());
    }

    #[test]
    fn network_json_rejects_bad_rows() {
        let json = network_to_json(&two_node()).replace("0.8", "1.8");
        assert!(network_from_json(&json).is_err());
        let cyclic = r#"{"mpn_type":"DMPN","epsilon":0.1,"variables":["a","b"],
            "parents":[[1],[0]],"cpds":[{"child":0,"rows":[0,1]},{"child":1,"rows":[0,1]}]}"#;
        assert!(matches!(network_from_json(cyclic), Err(Error::CycleDetected(_))));
    }

    #[test]
    fn csv_errors_report_position() {
        let err = dataset_from_csv("a,b\n0,1\n1,x\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let err = dataset_from_csv("a,b\n0,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let text = "a,b,c\n0,1,1\n1,0,0\n";
        let ds = dataset_from_csv(text).unwrap();
        assert_eq!(ds.m(), 2);
        assert_eq!(dataset_to_csv(&ds), text);
        // CRLF input parses to the same dataset
        assert_eq!(dataset_from_csv("a,b,c\r\n0,1,1\r\n1,0,0\r\n").unwrap(), ds);
    }

    #[test]
    fn dot_labels_use_four_decimals() {
        let net = two_node();
        let dot = dag_to_dot(net.dag(), &[((0, 1), 0.912345)]);
        assert!(dot.contains("\"A\" -> \"B\" [label=\"0.9123\"]"));
    }
}
