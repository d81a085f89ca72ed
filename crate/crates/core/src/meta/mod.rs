pub mod pool;
pub mod transform;
