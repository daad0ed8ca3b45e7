pub mod accept;
pub mod adorn;
pub mod ast;
pub mod cli;
pub mod error;
pub mod guard;
pub mod infer;
pub mod levelmap;
pub mod logic;
pub mod normalize;
pub mod oracle;
pub mod par;
pub mod parse;
pub mod report;
pub mod sample;
pub mod shape;
pub mod specialize;
pub mod symbol;
