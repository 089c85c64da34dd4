pub mod dsp_oracle;
pub mod metric_oracle;
