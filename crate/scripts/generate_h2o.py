"""Write the bundled H2O active-space Hamiltonian as a fermionic term list.

Requires pyscf. STO-3G basis, equilibrium geometry, CAS(4e, 4o) around the
HOMO/LUMO gap. Modes are spin orbitals interleaved as 2*p + spin (up=0, down=1).
Usage: python scripts/generate_h2o.py data/h2o_cas44_sto3g.json
"""

import json
import sys

import numpy as np
from pyscf import gto, mcscf, scf

N_ACTIVE_ORB = 4
N_ACTIVE_ELEC = 4
CUTOFF = 1e-10


def main(path):
    mol = gto.M(
        atom="O 0.0 0.0 0.1173; H 0.0 0.7572 -0.4692; H 0.0 -0.7572 -0.4692",
        basis="sto-3g",
        unit="Angstrom",
    )
    mf = scf.RHF(mol).run(verbose=0)
    cas = mcscf.CASCI(mf, N_ACTIVE_ORB, N_ACTIVE_ELEC)
    h1, ecore = cas.get_h1eff()
    h2 = cas.get_h2eff()
    from pyscf import ao2mo

    h2 = ao2mo.restore(1, h2, N_ACTIVE_ORB)  # chemist notation (pq|rs)
    e_casci = cas.kernel(verbose=0)[0]

    terms = [{"c": [float(ecore), 0.0], "ops": []}]
    norb = N_ACTIVE_ORB
    for p in range(norb):
        for q in range(norb):
            if abs(h1[p, q]) < CUTOFF:
                continue
            for s in range(2):
                terms.append(
                    {"c": [float(h1[p, q]), 0.0], "ops": [[2 * p + s, "+"], [2 * q + s, "-"]]}
                )
    # 1/2 sum (pq|rs) c+_{p s} c+_{r t} c_{s' t} c_{q s}
    for p in range(norb):
        for q in range(norb):
            for r in range(norb):
                for s in range(norb):
                    v = 0.5 * h2[p, q, r, s]
                    if abs(v) < CUTOFF:
                        continue
                    for a in range(2):
                        for b in range(2):
                            i, k = 2 * p + a, 2 * r + b
                            l, j = 2 * s + b, 2 * q + a
                            if i == k or j == l:
                                continue
                            terms.append(
                                {
                                    "c": [float(v), 0.0],
                                    "ops": [[i, "+"], [k, "+"], [l, "-"], [j, "-"]],
                                }
                            )
    out = {
        "num_modes": 2 * norb,
        "num_electrons": N_ACTIVE_ELEC,
        "reference_energy": float(e_casci),
        "terms": terms,
    }
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1)
    print(f"{len(terms)} terms, CASCI energy {e_casci:.10f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/h2o_cas44_sto3g.json")
