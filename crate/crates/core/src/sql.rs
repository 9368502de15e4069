//! DDL emission for mapping candidates.

use std::fmt::Write as _;

use crate::mapping::MappingCandidate;

/// Renders `CREATE TABLE` statements in table order.
///
/// The primary key is declared inline on its column; foreign keys follow as
/// table constraints in candidate order. Output is byte-stable.
pub fn emit_sql(candidate: &MappingCandidate) -> String {
    let mut out = String::new();
    for (i, table) in candidate.tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let mut lines: Vec<String> = table
            .fields
            .iter()
            .map(|f| {
                if f.name == table.primary_key {
                    format!("    {} {} PRIMARY KEY", f.name, f.sql_type)
                } else {
                    format!("    {} {}", f.name, f.sql_type)
                }
            })
            .collect();
        lines.extend(
            candidate
                .foreign_keys
                .iter()
                .filter(|fk| fk.from_table == table.name)
                .map(|fk| {
                    format!(
                        "    FOREIGN KEY ({}) REFERENCES {} ({})",
                        fk.from_field, fk.to_table, fk.to_field
                    )
                }),
        );
        let _ = writeln!(
            out,
            "CREATE TABLE {} (\n{}\n);",
            table.name,
            lines.join(",\n")
        );
    }
    out
}
