use proptest::prelude::*;

use stencilsmith_core::autotune::{pareto_front, search, ParetoPoint, SearchMode, SearchSpace};
use stencilsmith_core::grid::{compare, make_grid};
use stencilsmith_core::kernels::{FieldSet, HdiffParams, KernelInput};
use stencilsmith_core::perfmodel::{
    preset, reference_workload, roofline_attainable, simulate_run, MachineModel,
};
use stencilsmith_core::real::ulp_distance;
use stencilsmith_core::tiling::{
    execute_tiled_serial, plan_windows, tile_footprint, validate_plan, TileSpec,
};
use stencilsmith_core::{Dims3, Halo, InitSpec, Kernel, Region};

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![Just(Kernel::Hdiff), Just(Kernel::Vadvc), Just(Kernel::Copy)]
}

fn grid_and_tile() -> impl Strategy<Value = (Kernel, Dims3, TileSpec)> {
    (kernel(), 5usize..20, 5usize..20, 3usize..10).prop_flat_map(|(k, nx, ny, nz)| {
        let (ix, iy) = (nx - 4, ny - 4);
        let tz = if k == Kernel::Vadvc {
            Just(nz).boxed()
        } else {
            (1..=nz).boxed()
        };
        (
            Just(k),
            Just(Dims3::new(nx, ny, nz).unwrap()),
            (1..=ix, 1..=iy, tz),
        )
            .prop_map(|(k, d, (tx, ty, tz))| (k, d, TileSpec::new(tx, ty, tz)))
    })
}

proptest! {
    #[test]
    fn plans_partition_the_interior((k, d, t) in grid_and_tile()) {
        let plan = plan_windows(d, Halo::DYCORE, t, k).unwrap();
        prop_assert_eq!(validate_plan(&plan, d), Ok(()));
        prop_assert_eq!(plan.interior_volume(), (d.nx - 4) * (d.ny - 4) * d.nz);
    }

    #[test]
    fn tiled_output_is_bitwise_equal_to_the_sweep((k, d, t) in grid_and_tile(), seed in any::<u64>()) {
        let plan = plan_windows(d, Halo::DYCORE, t, k).unwrap();
        let src = make_grid::<f32>(d, Halo::DYCORE, InitSpec::PseudoRandom { seed }).unwrap();
        let fields = FieldSet::<f32>::pseudo_random(d, Halo::DYCORE, seed).unwrap();
        let input = match k {
            Kernel::Hdiff => KernelInput::Hdiff { src: &src, params: HdiffParams::default() },
            Kernel::Vadvc => KernelInput::Vadvc(&fields),
            Kernel::Copy => KernelInput::Copy(&src),
        };
        let out = execute_tiled_serial(&input, &plan).unwrap();
        prop_assert_eq!(compare(&out, &input.reference().unwrap(), Region::All).unwrap().max_ulp_diff, 0);
    }

    #[test]
    fn footprint_is_linear_in_element_size(k in kernel(), tx in 1usize..64, ty in 1usize..64, tz in 1usize..64) {
        let t = TileSpec::new(tx, ty, tz);
        prop_assert_eq!(2 * tile_footprint(t, k, 2), tile_footprint(t, k, 4));
        prop_assert_eq!(2 * tile_footprint(t, k, 4), tile_footprint(t, k, 8));
    }

    #[test]
    fn roofline_is_monotone(ai in 0.0f64..100.0, peak in 0.1f64..1e3, bw in 0.1f64..1e3, d in 0.0f64..10.0) {
        let base = roofline_attainable(ai, peak, bw);
        prop_assert!(roofline_attainable(ai + d, peak, bw) >= base);
        prop_assert!(roofline_attainable(ai, peak + d, bw) >= base);
        prop_assert!(roofline_attainable(ai, peak, bw + d) >= base);
    }

    #[test]
    fn run_time_never_grows_with_pe_count(
        name in prop::sample::select(vec!["hbm_ocapi", "hbm_capi2", "ddr4_capi2", "hbm_multi_ocapi"]),
        k in prop_oneof![Just(Kernel::Hdiff), Just(Kernel::Vadvc)],
        fraction in 0.0f64..=1.0,
        overhead in 0.0f64..1e-3,
    ) {
        let m = MachineModel {
            host_traffic_fraction: fraction,
            invocation_overhead: overhead,
            ..preset(name).unwrap().model(k).unwrap()
        };
        let w = reference_workload(k, 4);
        let times: Vec<f64> = (1..=16).filter_map(|n| simulate_run(&w, n, &m).ok()).map(|r| r.time_s).collect();
        prop_assert!(!times.is_empty());
        prop_assert!(times.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn more_channels_help_only_channel_bound_runs(
        k in prop_oneof![Just(Kernel::Hdiff), Just(Kernel::Vadvc)],
        rate in 1.0f64..200.0,
        fraction in 0.0f64..=0.2,
        n in 1usize..=8,
    ) {
        let base = MachineModel {
            pe_rate: rate,
            host_traffic_fraction: fraction,
            channels_total: 32,
            ..preset("hbm_ocapi").unwrap().model(k).unwrap()
        };
        let wide = MachineModel { channels_per_pe: 2, ..base };
        let w = reference_workload(k, 4);
        let a = simulate_run(&w, n, &base).unwrap();
        let b = simulate_run(&w, n, &wide).unwrap();
        prop_assert!(b.time_s <= a.time_s);
        prop_assert_eq!(b.time_s < a.time_s, a.bottleneck.name() == "channel");
    }

    #[test]
    fn dedicated_gflops_scale_linearly_while_channel_bound(bytes in 1u64 << 20..1u64 << 40, flops in 1u64..1 << 30) {
        let m = MachineModel { pe_rate: 1e9, ..preset("hbm_ocapi").unwrap().model(Kernel::Hdiff).unwrap() };
        let w = stencilsmith_core::perfmodel::Workload { kernel: Kernel::Hdiff, bytes_read: bytes, bytes_written: bytes, flops };
        let g1 = simulate_run(&w, 1, &m).unwrap().gflops;
        for n in 1..=32 {
            let r = simulate_run(&w, n, &m).unwrap();
            prop_assert!(ulp_distance(r.gflops, n as f64 * g1) <= 1, "n = {}", n);
            let direct = flops as f64 / r.time_s / 1e9;
            prop_assert!((r.gflops - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn front_points_are_mutually_non_dominated(raw in prop::collection::vec((1usize..5, 0u32..20, 1u64..20), 1..40)) {
        let pts: Vec<ParetoPoint> = raw
            .iter()
            .enumerate()
            .map(|(i, &(tx, g, f))| ParetoPoint { tile: TileSpec::new(tx, i + 1, 1), throughput: g as f64, footprint: f })
            .collect();
        let front = pareto_front(&pts);
        prop_assert!(!front.is_empty());
        for p in &front {
            prop_assert!(!pts.iter().any(|q| q.dominates(p)));
        }
        for p in &pts {
            prop_assert!(front.iter().any(|f| f.tile == p.tile || f.dominates(p) || (f.throughput == p.throughput && f.footprint == p.footprint)));
        }
        prop_assert!(front.windows(2).all(|w| w[0].footprint <= w[1].footprint));
        prop_assert_eq!(pareto_front(&front), front.clone());
    }

    #[test]
    fn heuristic_fronts_never_beat_the_exhaustive_front(
        seed in any::<u64>(),
        n in 1usize..40,
        budget in prop::option::of(2_000u64..400_000),
        k in prop_oneof![Just(Kernel::Hdiff), Just(Kernel::Vadvc)],
    ) {
        let d = Dims3::new(36, 20, 16).unwrap();
        let space = SearchSpace::new(k, d, Halo::DYCORE, 4).with_budget(budget);
        let m = MachineModel { pe_rate: 1e3, ..preset("hbm_ocapi").unwrap().model(k).unwrap() };
        let Ok(full) = search(&space, SearchMode::Exhaustive, &m) else { return Ok(()) };
        for mode in [SearchMode::Random { samples: n, seed }, SearchMode::HillClimb { starts: n.div_ceil(8), seed }] {
            let Ok(h) = search(&space, mode, &m) else { continue };
            prop_assert_eq!(h.evaluations, h.evaluated.len());
            for p in &h.front {
                prop_assert!(h.evaluated.contains(p));
                prop_assert!(full.front.iter().any(|f| f.dominates(p) || (f.throughput == p.throughput && f.footprint == p.footprint)));
            }
        }
    }
}
