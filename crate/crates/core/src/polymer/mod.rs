//! Partition functions of the homogeneous and disordered model.

pub mod checks;
pub mod disorder;
pub mod free_energy;
pub mod partition;

pub use checks::{sandwich_check, superadditivity_check, SandwichReport, SuperadditivityReport};
pub use disorder::{DisorderField, DisorderLaw, DisorderSpec, Field, TableField};
pub use free_energy::{
    annealed_quantities, homogeneous_critical_scan, homogeneous_free_energy_diagonal, quenched_free_energy,
    replica_stats, AnnealedQuantities, AspectRatio, FreeEnergyEstimate, HomogeneousScan, ModelParams,
    QuenchedScan, ScanRow,
};
pub use partition::{
    constrained_partition, free_partition, free_partition_at, partition_from, rectangle_partition, ExitTable,
    PartitionGrid, Pinning,
};
