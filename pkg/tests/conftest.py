from __future__ import annotations

import numpy as np
import pytest

from benchlens import bundled
from benchlens.dataset import CounterSample, RunRecord, build_records, load_canonical
from benchlens.events import CANONICAL_EVENTS
from benchlens.proxy import WorkloadProfile


@pytest.fixture(scope="session")
def sample_records():
    return load_canonical(bundled.sample_store_path(), bundled.sample_scores_path())


@pytest.fixture(scope="session")
def sample_store_path():
    return bundled.sample_store_path()


@pytest.fixture(scope="session")
def sample_scores_path():
    return bundled.sample_scores_path()


def make_full_record(
    suite: str,
    workload: str,
    machine: str,
    rng: np.random.Generator,
    *,
    base_instructions: float = 1e12,
) -> RunRecord:
    """A run with every canonical event populated with consistent counts."""
    instructions = float(round(base_instructions * rng.uniform(0.5, 2.0)))
    cycles = float(round(instructions / rng.uniform(0.5, 4.0)))
    kernel = float(round(instructions * rng.uniform(0.01, 0.2)))
    values = {
        "instructions": instructions,
        "cycles": cycles,
        "loads": float(round(instructions * rng.uniform(0.1, 0.5))),
        "stores": float(round(instructions * rng.uniform(0.01, 0.2))),
        "branches": float(round(instructions * rng.uniform(0.01, 0.25))),
        "branch_misses": float(round(instructions * rng.uniform(0.0, 0.01))),
        "l1i_misses": float(round(instructions * rng.uniform(0.0, 0.08))),
        "l1d_misses": float(round(instructions * rng.uniform(0.0, 0.05))),
        "l2_misses": float(round(instructions * rng.uniform(0.0, 0.02))),
        "l3_misses": float(round(instructions * rng.uniform(0.0, 0.01))),
        "l1_itlb_misses": float(round(instructions * rng.uniform(0.0, 1e-4))),
        "l1_dtlb_misses": float(round(instructions * rng.uniform(0.0, 1e-3))),
        "l2_tlb_misses": float(round(instructions * rng.uniform(0.0, 1e-4))),
        "frontend_stall_cycles": float(round(cycles * rng.uniform(0.0, 0.4))),
        "backend_stall_cycles": float(round(cycles * rng.uniform(0.0, 0.5))),
        "fp_instructions": float(round(instructions * rng.uniform(0.0, 0.3))),
        "vector_instructions": float(round(instructions * rng.uniform(0.0, 0.2))),
        "kernel_instructions": kernel,
        "user_instructions": instructions - kernel,
        "dram_bytes": float(round(cycles * rng.uniform(0.0, 8.0))),
    }
    assert set(values) == set(CANONICAL_EVENTS)
    samples = tuple(
        CounterSample(suite=suite, workload=workload, machine=machine, event=e, value=v)
        for e, v in sorted(values.items())
    )
    return RunRecord(
        suite=suite,
        workload=workload,
        machine=machine,
        samples=samples,
        wallclock_seconds=float(rng.uniform(50.0, 500.0)),
    )


def make_full_store(
    workloads: list[str],
    machines: list[str],
    seed: int = 7,
    suite: str = "synthetic",
) -> list[RunRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for workload in workloads:
        for machine in machines:
            records.append(make_full_record(suite, workload, machine, rng))
    return build_records([s for rec in records for s in rec.samples],
                         wallclock={rec.key: rec.wallclock_seconds for rec in records})


def make_profile(
    workload: str,
    *,
    ipc: float,
    instr_rate: float,
    l1i_mpki: float,
    l3_mpki: float = 1.0,
    duration: float = 1.0,
) -> WorkloadProfile:
    """Profile with consistent instruction/cycle/miss rates for blend tests."""
    return WorkloadProfile(
        workload=workload,
        rates={
            "instructions": instr_rate,
            "cycles": instr_rate / ipc,
            "l1i_misses": l1i_mpki * instr_rate / 1000.0,
            "l3_misses": l3_mpki * instr_rate / 1000.0,
        },
        duration=duration,
    )


CACTUS_IPC = 1.696
FOTONIK_IPC = 0.785
CACTUS_L1I_MPKI = 82.3
FOTONIK_L1I_MPKI = 0.24
BLEND_TARGET_IPC = 1.16
STATED_IPC_GAP = 0.137


def icache_stress_pair() -> tuple[WorkloadProfile, WorkloadProfile]:
    """Two profiles, one icache-heavy and one icache-light, whose equal-time
    blend lands on the published mixed IPC by construction."""
    # instruction-volume ratio that makes the equal-time blend IPC hit the target
    ratio = (BLEND_TARGET_IPC / FOTONIK_IPC - 1.0) / (1.0 - BLEND_TARGET_IPC / CACTUS_IPC)
    fotonik_rate = 1e9
    cactus = make_profile(
        "709.cactus_r",
        ipc=CACTUS_IPC,
        instr_rate=ratio * fotonik_rate,
        l1i_mpki=CACTUS_L1I_MPKI,
        l3_mpki=1.2,
    )
    fotonik = make_profile(
        "749.fotonik3d_r",
        ipc=FOTONIK_IPC,
        instr_rate=fotonik_rate,
        l1i_mpki=FOTONIK_L1I_MPKI,
        l3_mpki=4.5,
    )
    return cactus, fotonik
