pub mod cli;
pub mod engine;
pub mod field;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod space;
pub mod theorems;
