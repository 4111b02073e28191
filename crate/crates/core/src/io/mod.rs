//! Reading and writing grouped tables, survey microdata and results;
//! embedded reference tables; synthetic microdata.

mod emit;
mod fixtures;
mod format;
mod grouped;
mod microdata;
mod synth;

pub use emit::{emit_results, OutputFormat, ResultRow, CSV_COLUMNS, VERSION};
pub use fixtures::{fixture, fixture_set, load_fixture, sha256_hex, Fixture, FIXTURES};
pub use format::format_float;
pub use grouped::{parse_grouped_csv, read_grouped_csv, write_grouped_csv, GroupedTable};
pub use microdata::{parse_microdata_csv, read_microdata_csv, write_microdata_csv};
pub use synth::{synthesize_microdata, DesignSpec};
