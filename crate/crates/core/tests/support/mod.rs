pub mod cases;
pub mod consistency;
pub mod oracle;
