use super::*;
use crate::real::ulp_distance;

fn streaming(bytes: u64) -> Workload {
    Workload {
        kernel: Kernel::Copy,
        bytes_read: bytes / 2,
        bytes_written: bytes / 2,
        flops: 1_000_000,
    }
}

/// Channel-bound machine: nothing else can bind.
fn channel_only(bw: f64, shared: bool) -> MachineModel {
    MachineModel {
        channel_bw: bw,
        channels_total: 16,
        channels_per_pe: 1,
        shared_channel: shared,
        host_link_bw_read: 1e12,
        host_link_bw_write: 1e12,
        host_traffic_fraction: 1.0,
        pe_rate: 1e12,
        invocation_overhead: 0.0,
        power_base: 10.0,
        power_per_channel: 1.0,
        power_per_pe: 0.0,
        cpu: None,
    }
}

#[test]
fn intensity_examples() {
    let point = Workload {
        kernel: Kernel::Hdiff,
        bytes_read: 4,
        bytes_written: 4,
        flops: 34,
    };
    assert_eq!(arithmetic_intensity(&point), Ok(4.25));
    let copy = Workload {
        kernel: Kernel::Copy,
        bytes_read: 64,
        bytes_written: 64,
        flops: 0,
    };
    assert_eq!(arithmetic_intensity(&copy), Ok(0.0));
    let doubled = Workload {
        bytes_read: 8,
        bytes_written: 8,
        ..point
    };
    assert_eq!(arithmetic_intensity(&doubled), Ok(2.125));
    assert_eq!(arithmetic_intensity(&point.with_flops(0)).unwrap(), 0.0);
    let none = Workload {
        bytes_read: 0,
        bytes_written: 0,
        ..point
    };
    assert_eq!(arithmetic_intensity(&none), Err(ModelError::ZeroTraffic));
}

#[test]
fn roofline_examples() {
    assert_eq!(roofline_attainable(2.0, 10.0, 4.0), 8.0);
    assert_eq!(roofline_attainable(1e6, 10.0, 4.0), 10.0);
    assert_eq!(roofline_attainable(0.0, 10.0, 4.0), 0.0);
}

#[test]
fn pe_bandwidth_examples() {
    let m = channel_only(12.8, false);
    for n in 1..=16 {
        assert_eq!(effective_pe_bandwidth(&m, n), Ok(12.8));
    }
    let multi = MachineModel {
        channels_per_pe: 4,
        ..m
    };
    assert_eq!(effective_pe_bandwidth(&multi, 1), Ok(51.2));
    assert_eq!(
        effective_pe_bandwidth(&multi, 5),
        Err(ModelError::ChannelBudget {
            n_pe: 5,
            channels_per_pe: 4,
            channels_total: 16
        })
    );
    assert_eq!(
        effective_pe_bandwidth(&m, 17).unwrap_err(),
        ModelError::ChannelBudget {
            n_pe: 17,
            channels_per_pe: 1,
            channels_total: 16
        }
    );
    let shared = channel_only(25.6, true);
    assert_eq!(effective_pe_bandwidth(&shared, 2), Ok(12.8));
    assert_eq!(effective_pe_bandwidth(&shared, 0), Err(ModelError::NoPe));
}

#[test]
fn simulate_examples() {
    let w = streaming(1_000_000_000);
    let m = channel_only(12.8, false);
    let one = simulate_run(&w, 1, &m).unwrap();
    assert_eq!(one.time_s, 0.078125);
    assert_eq!(one.bottleneck, Bottleneck::Channel);
    let two = simulate_run(&w, 2, &m).unwrap();
    assert_eq!(two.time_s, 0.0390625);

    let shared = channel_only(25.6, true);
    for n in [1, 2, 4, 8, 16, 100] {
        let r = simulate_run(&w, n, &shared).unwrap();
        assert_eq!(r.time_s, 0.0390625, "n = {n}");
        assert_eq!(r.bottleneck, Bottleneck::Channel);
    }
}

#[test]
fn derived_fields_are_consistent() {
    let w = Workload {
        kernel: Kernel::Hdiff,
        bytes_read: 3_000_000,
        bytes_written: 1_000_000,
        flops: 17_000_000,
    };
    let m = MachineModel {
        pe_rate: 2.0,
        invocation_overhead: 1e-5,
        host_traffic_fraction: 0.5,
        ..channel_only(12.8, false)
    };
    let m = MachineModel {
        cpu: Some(CpuBaseline {
            gflops: 3.0,
            power_w: 50.0,
        }),
        ..m
    };
    for n in 1..=16 {
        let r = simulate_run(&w, n, &m).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        assert!(rel(r.gflops, w.flops as f64 / r.time_s / 1e9));
        assert!(rel(r.gflops_per_watt, r.gflops / r.power_w));
        assert!(rel(r.speedup_vs_cpu.unwrap(), r.gflops / 3.0));
        let e = energy_report(&m, n, &r);
        assert!(rel(e.energy_j, r.power_w * r.time_s));
        assert!(rel(e.gflops_per_watt, r.gflops_per_watt));
        assert!(rel(e.efficiency_ratio.unwrap(), r.gflops_per_watt / 0.06));
    }
}

#[test]
fn bottleneck_ties_prefer_compute() {
    // 12.8 GB over 12.8 GB/s and 12.8 GFLOP at 12.8 GFLOP/s: both one second.
    let w = Workload {
        kernel: Kernel::Hdiff,
        bytes_read: 6_400_000_000,
        bytes_written: 6_400_000_000,
        flops: 12_800_000_000,
    };
    let m = MachineModel {
        pe_rate: 12.8,
        ..channel_only(12.8, false)
    };
    let r = simulate_run(&w, 1, &m).unwrap();
    assert_eq!((r.t_channel, r.t_compute), (1.0, 1.0));
    assert_eq!(r.bottleneck, Bottleneck::Compute);
    let slow_host = MachineModel {
        host_link_bw_read: 6.4,
        host_link_bw_write: 6.4,
        ..m
    };
    assert_eq!(
        simulate_run(&w, 1, &slow_host).unwrap().bottleneck,
        Bottleneck::HostLink
    );
}

#[test]
fn energy_example() {
    let m = MachineModel {
        channels_per_pe: 4,
        ..channel_only(12.8, false)
    };
    let r = SimResult {
        n_pe: 1,
        t_host: 0.0,
        t_channel: 0.5,
        t_compute: 0.0,
        time_s: 0.5,
        gflops: 40.0,
        power_w: 14.0,
        gflops_per_watt: 40.0 / 14.0,
        speedup_vs_cpu: None,
        bottleneck: Bottleneck::Channel,
    };
    let e = energy_report(&m, 1, &r);
    assert_eq!(e.power_w, 14.0);
    assert_eq!(e.energy_j, 7.0);
    assert!((e.gflops_per_watt - 2.857).abs() < 5e-4);
    assert_eq!(e.cpu_efficiency, None);
}

#[test]
fn invalid_models_are_rejected() {
    let w = streaming(1000);
    let good = channel_only(12.8, false);
    let bad = [
        MachineModel {
            channel_bw: 0.0,
            ..good
        },
        MachineModel {
            pe_rate: f64::NAN,
            ..good
        },
        MachineModel {
            channels_per_pe: 0,
            ..good
        },
        MachineModel {
            channels_per_pe: 17,
            ..good
        },
        MachineModel {
            host_traffic_fraction: 1.5,
            ..good
        },
        MachineModel {
            power_per_pe: -1.0,
            ..good
        },
        MachineModel {
            invocation_overhead: f64::INFINITY,
            ..good
        },
    ];
    for m in bad {
        assert!(
            matches!(simulate_run(&w, 1, &m), Err(ModelError::InvalidModel(_))),
            "{m:?}"
        );
    }
    assert_eq!(scaling_curve(&w, &good, 1..1), Err(ModelError::EmptyRange));
}

#[test]
fn dedicated_scaling_is_linear_while_channel_bound() {
    let m = channel_only(12.8, false);
    for w in [
        streaming(1_000_000_000),
        reference_workload(Kernel::Hdiff, 4),
        reference_workload(Kernel::Vadvc, 2),
    ] {
        let curve = scaling_curve(&w, &m, 1..=16).unwrap();
        let g1 = curve[0].result.unwrap().gflops;
        for p in &curve {
            let r = p.result.unwrap();
            assert_eq!(r.bottleneck, Bottleneck::Channel);
            assert!(
                ulp_distance(r.gflops, p.n_pe as f64 * g1) <= 1,
                "n = {}",
                p.n_pe
            );
        }
    }
}

#[test]
fn infeasible_points_stay_in_the_curve() {
    let m = MachineModel {
        channels_per_pe: 4,
        ..channel_only(12.8, false)
    };
    let curve = scaling_curve(&streaming(4096), &m, 1..=6).unwrap();
    assert_eq!(curve.len(), 6);
    assert!(curve[..4].iter().all(|p| p.result.is_ok()));
    assert!(curve[4..]
        .iter()
        .all(|p| matches!(p.result, Err(ModelError::ChannelBudget { .. }))));
}

#[test]
fn plan_traffic_counts_halo_overcount() {
    use crate::grid::{Dims3, Halo};
    use crate::tiling::{plan_windows, TileSpec};
    let dims = Dims3::new(68, 68, 64).unwrap();
    let plan = |t| plan_windows(dims, Halo::DYCORE, t, Kernel::Hdiff).unwrap();
    let big = Workload::from_plan(&plan(TileSpec::new(16, 16, 64)), 4);
    let small = Workload::from_plan(&plan(TileSpec::new(1, 1, 64)), 4);
    // 16 tiles of 20x20x64 vs 4096 tiles of 5x5x64.
    assert_eq!(big.bytes_read, 16 * 20 * 20 * 64 * 4);
    assert_eq!(small.bytes_read, 4096 * 5 * 5 * 64 * 4);
    assert_eq!(big.bytes_written, small.bytes_written);
    assert_eq!(big.flops, 34 * 64 * 64 * 64);

    let copy = Workload::from_plan(
        &plan_windows(dims, Halo::DYCORE, TileSpec::new(4, 8, 2), Kernel::Copy).unwrap(),
        8,
    );
    assert_eq!(copy.bytes_read, copy.bytes_written);
    assert_eq!(copy.flops, 0);
}

mod calibration {
    use super::*;

    fn model(preset_name: &str, kernel: Kernel) -> MachineModel {
        preset(preset_name).unwrap().model(kernel).unwrap()
    }

    fn within(value: f64, target: f64, rel: f64) -> bool {
        (value - target).abs() <= rel * target
    }

    #[test]
    fn preset_fields() {
        let names: Vec<_> = builtin_presets().iter().map(|p| p.name).collect();
        assert_eq!(
            names,
            [
                "hbm_ocapi",
                "hbm_capi2",
                "ddr4_capi2",
                "hbm_multi_ocapi",
                "hbm_copy",
                "cpu_power9"
            ]
        );
        for p in builtin_presets() {
            assert!(!p.description.is_empty());
            for c in &p.kernels {
                p.model(c.kernel).unwrap().validate().unwrap();
            }
        }
        let ocapi = preset("hbm_ocapi").unwrap();
        assert_eq!(ocapi.base.host_link_bw_read, 22.1);
        assert_eq!(ocapi.base.host_link_bw_write, 22.0);
        assert_eq!(ocapi.base.channel_bw, 12.8);
        let ddr4 = preset("ddr4_capi2").unwrap();
        assert_eq!(ddr4.base.channel_bw, 25.6);
        assert!(ddr4.base.shared_channel);
        assert_eq!(preset("hbm_multi_ocapi").unwrap().base.channels_per_pe, 4);
        assert_eq!(preset("hbm_capi2").unwrap().base.host_link_bw_read, 13.9);
        assert!(preset("nope").is_none());
    }

    #[test]
    fn full_boards_reproduce_reported_throughput_and_efficiency() {
        let vadvc = simulate_run(
            &reference_workload(Kernel::Vadvc, 4),
            14,
            &model("hbm_ocapi", Kernel::Vadvc),
        )
        .unwrap();
        assert!(within(vadvc.gflops, 157.1, 1e-3), "{}", vadvc.gflops);
        assert_eq!(vadvc.bottleneck, Bottleneck::Compute);
        assert!(within(vadvc.gflops_per_watt, 1.61, 1e-2));
        assert!(within(vadvc.power_w, 157.1 / 1.61, 1e-9));
        assert!(within(vadvc.speedup_vs_cpu.unwrap(), 5.3, 0.05));

        let hdiff = simulate_run(
            &reference_workload(Kernel::Hdiff, 4),
            16,
            &model("hbm_ocapi", Kernel::Hdiff),
        )
        .unwrap();
        assert!(within(hdiff.gflops, 608.4, 1e-3), "{}", hdiff.gflops);
        assert_eq!(hdiff.bottleneck, Bottleneck::Compute);
        assert!(within(hdiff.gflops_per_watt, 21.01, 1e-2));
        assert!(within(hdiff.speedup_vs_cpu.unwrap(), 608.4 / 58.5, 1e-3));
    }

    #[test]
    fn cpu_reference_rows() {
        let m = model("cpu_power9", Kernel::Vadvc);
        let r = simulate_run(&reference_workload(Kernel::Vadvc, 4), 1, &m).unwrap();
        assert!(within(r.gflops, 29.1, 1e-9));
        assert_eq!(r.power_w, 99.2);
        let e = energy_report(&m, 1, &r);
        assert!(within(e.cpu_efficiency.unwrap(), 0.2933, 1e-3));
        let vadvc = model("hbm_ocapi", Kernel::Vadvc);
        let board = simulate_run(&reference_workload(Kernel::Vadvc, 4), 14, &vadvc).unwrap();
        assert!(within(
            energy_report(&vadvc, 14, &board).efficiency_ratio.unwrap(),
            5.5,
            0.01
        ));
    }

    #[test]
    fn ocapi_gain_over_capi2() {
        for (kernel, n, gain) in [(Kernel::Vadvc, 14, 1.37), (Kernel::Hdiff, 16, 1.44)] {
            let w = reference_workload(kernel, 4);
            let o = simulate_run(&w, n, &model("hbm_ocapi", kernel)).unwrap();
            let c = simulate_run(&w, n, &model("hbm_capi2", kernel)).unwrap();
            assert!(within(o.gflops / c.gflops, gain, 1e-9));
        }
    }

    #[test]
    fn ddr4_scaling_is_sublinear() {
        for kernel in [Kernel::Vadvc, Kernel::Hdiff] {
            let m = model("ddr4_capi2", kernel);
            let w = reference_workload(kernel, 4);
            let curve = scaling_curve(&w, &m, 1..=8).unwrap();
            let g: Vec<f64> = curve.iter().map(|p| p.result.unwrap().gflops).collect();
            assert!(g[7] / g[0] < 8.0);
            for n in 1..8 {
                assert!(g[n] >= g[n - 1]);
                assert!(g[n] - g[n - 1] <= g[0] * (1.0 + 1e-12));
            }
            let floor = w.total_bytes() as f64 / (25.6 * 1e9);
            assert!(
                within(curve[7].result.unwrap().time_s, floor, 1e-12),
                "{kernel}"
            );
        }
    }

    #[test]
    fn copy_saturates_after_sixteen_pes() {
        let m = model("hbm_copy", Kernel::Copy);
        let w = reference_workload(Kernel::Copy, 4);
        let g = |n| simulate_run(&w, n, &m).unwrap().gflops;
        assert!(g(24) / g(16) < 1.05);
        assert!(g(16) / g(8) > 1.05);
        assert!(matches!(
            simulate_run(&w, 25, &m),
            Err(ModelError::ChannelBudget { .. })
        ));
    }

    #[test]
    fn multi_channel_board_fits_three_pes() {
        let m = model("hbm_multi_ocapi", Kernel::Hdiff);
        let curve = scaling_curve(&reference_workload(Kernel::Hdiff, 4), &m, 1..=4).unwrap();
        assert!(curve[..3].iter().all(|p| p.result.is_ok()));
        assert!(curve[3].result.is_err());
        assert_eq!(
            curve[2].result.unwrap().power_w,
            10.0 + 12.0 + 3.0 * m.power_per_pe
        );
    }
}
