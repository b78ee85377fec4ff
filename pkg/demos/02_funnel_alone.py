"""A funnel on its own never produces rings.

Feed the cortex the pure funnel stripes cos(5 pi x2) and look at the
stationary state.  For a linear response it is the input times a constant.
Saturating responses bend the amplitude but cannot move the zero lines, since
the input does not depend on x1 and neither can the output.  The binarized
output is the same fan of rays as the input, with no afterimage.
"""

import sys
from pathlib import Path

import numpy as np

from neurofield import GridSpec, Stimulus, binarize, generate, stationary_state
from neurofield.response import CAPPED, ERF, LINEAR, RATIONAL, TANH
from neurofield.stimuli import pattern_to_image, warp_to_retina, write_pbm, write_pgm

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output") / "funnel"
out.mkdir(parents=True, exist_ok=True)

spec = GridSpec(10.0, 512)
I = generate(Stimulus("funnel"), spec)
reference = binarize(I)

for kind in (LINEAR, TANH, ERF, RATIONAL, CAPPED):
    a, rep = stationary_state(I, 0.8, kind, tol=1e-13)
    spread = float(np.max(np.var(a.values, axis=0)))
    print(f"{kind.name:14s} iterations {rep.iterations:3d}  peak {a.sup():.4f}  "
          f"x1-variance {spread:.1e}  pattern mismatch {binarize(a).mismatch(reference):.4f}")

write_pbm(out / "funnel_cortex.pbm", pattern_to_image(reference))
write_pgm(out / "funnel_retina.pgm", warp_to_retina(reference, 512, np.exp(6), 2 / np.pi))
print(f"images written to {out}")
