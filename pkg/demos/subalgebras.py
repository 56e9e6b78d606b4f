"""Center, a MASA and a corner of one system, each certified as a subsystem."""

import numpy as np

from lawstar import sampling
from lawstar.lawstruct import center, certify_subsystem, corner, masa_containing

rng = np.random.default_rng(8)
sys = sampling.random_system(rng, shape="vee")
subs = {
    "center": center(sys),
    "masa": masa_containing(sampling.random_selfadjoint_thread(rng, sys)),
    "corner": corner(sys, sampling.random_projection_thread(rng, sys)),
}
for kind, sub in subs.items():
    rep = certify_subsystem(sub, samples=4, seed=1)
    dims = {n: sub.dim(n) for n in sys.nodes}
    print(f"{kind}: dimensions {dims}, certified {rep.ok}")
    for name, v in rep.verdicts.items():
        print(f"    {name:18s} {'pass' if v.ok else 'FAIL'}  ({v.checks} checks, worst {v.residual:.1e})")
