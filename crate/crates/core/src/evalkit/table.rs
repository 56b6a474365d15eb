//! Plain-text contingency tables: rows of integers separated by whitespace
//! or commas, `#` comments, optional header row and row labels.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn parse_contingency(text: &str) -> Result<ContingencyTable, EvalError> {
    let mut table = ContingencyTable::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let numeric = |t: &str| t.parse::<u64>().is_ok();
        if table.counts.is_empty()
            && table.column_labels.is_empty()
            && !tokens.iter().any(|t| numeric(t))
        {
            table.column_labels = tokens.iter().map(|t| t.to_string()).collect();
            continue;
        }
        let (label, cells) = match tokens.first() {
            Some(first) if !numeric(first) => (Some(first.to_string()), &tokens[1..]),
            _ => (None, &tokens[..]),
        };
        let row = cells
            .iter()
            .map(|t| {
                t.parse::<u64>().map_err(|_| EvalError::TableParse {
                    line: i + 1,
                    message: format!("`{t}` is not a non-negative integer"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = table.counts.first() {
            if first.len() != row.len() {
                return Err(EvalError::TableParse {
                    line: i + 1,
                    message: format!("{} cells, expected {}", row.len(), first.len()),
                });
            }
        }
        table
            .row_labels
            .push(label.unwrap_or_else(|| format!("row{}", table.counts.len() + 1)));
        table.counts.push(row);
    }
    if table.counts.is_empty() {
        return Err(EvalError::Table("no rows".into()));
    }
    let width = table.counts[0].len();
    // A header may name the row-label column too.
    if table.column_labels.len() == width + 1 {
        table.column_labels.remove(0);
    }
    if !table.column_labels.is_empty() && table.column_labels.len() != width {
        return Err(EvalError::Table(format!(
            "{} column labels for {width} columns",
            table.column_labels.len()
        )));
    }
    if table.column_labels.is_empty() {
        table.column_labels = (1..=width).map(|j| format!("col{j}")).collect();
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_grid() {
        let t = parse_contingency("# comment\n10 10\n10, 10\n").unwrap();
        assert_eq!(t.counts, vec![vec![10, 10], vec![10, 10]]);
        assert_eq!(t.row_labels, ["row1", "row2"]);
    }

    #[test]
    fn labelled_grid() {
        let t = parse_contingency("MIT Apache-2.0\ngithub 5 3 # repos\nhub 1 7\n").unwrap();
        assert_eq!(t.column_labels, ["MIT", "Apache-2.0"]);
        assert_eq!(t.row_labels, ["github", "hub"]);
        assert_eq!(t.counts[1], vec![1, 7]);
        let cornered = parse_contingency("platform MIT Apache-2.0\ngithub 5 3\nhub 1 7\n").unwrap();
        assert_eq!(cornered, t);
    }

    #[test]
    fn ragged_and_negative_rejected() {
        assert!(parse_contingency("1 2\n3\n").is_err());
        assert!(parse_contingency("1 -2\n3 4\n").is_err());
        assert!(parse_contingency("# nothing\n").is_err());
    }
}
