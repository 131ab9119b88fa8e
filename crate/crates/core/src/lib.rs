pub mod arith;
pub mod budget;
pub mod charsum;
pub mod count;
pub mod error;
pub mod fermat;
pub mod field;
pub mod hyperplane;
pub mod poly;
