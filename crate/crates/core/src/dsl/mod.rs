//! Profile-expression language and spec documents.

pub mod ast;
pub mod document;
pub mod parser;

pub use ast::{BinOp, Constant, Expr, Func};
pub use document::{json_equal, FamilyParams, ProfileSources, SpecDocument};
pub use parser::parse_expression;
