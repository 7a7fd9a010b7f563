pub mod cascade_oracle;
