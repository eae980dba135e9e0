pub mod block;
pub mod coupling;
pub mod rat;
pub mod verify7;
