"""The MacKay rays afterimage.

Adding a small step eps * H(2 - x1) to the funnel models the dense centre of
MacKay's ray figure: in cortical coordinates the fovea is the left half-plane.
The step breaks the x1 invariance, and the response to it decays into the
right half-plane while oscillating.  Subtracting the funnel-only state isolates
that response.  Its zeros are evenly spaced at about 0.691 in x1, which on the
retina means rings at geometrically growing radii, orthogonal to the rays.

The same run with the saturating response s/(1+|s|) keeps the zero pattern.
"""

import math
import sys
from pathlib import Path


from neurofield import GridSpec, Stimulus, binarize, generate, stationary_state
from neurofield.experiments import afterimage_profile
from neurofield.response import LINEAR, RATIONAL
from neurofield.stimuli import field_to_image, warp_to_retina, write_pgm

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output") / "rays"
out.mkdir(parents=True, exist_ok=True)

spec = GridSpec(10.0, 512)
rays = generate(Stimulus("mackay_rays", epsilon=0.025, theta=2.0), spec)
funnel = generate(Stimulus("funnel"), spec)
predicted = 1 / math.sqrt(2 * math.pi / 3)

for kind in (LINEAR, RATIONAL):
    a, _ = stationary_state(rays, 1.0, kind, tol=1e-14, max_iter=3000)
    f, _ = stationary_state(funnel, 1.0, kind, tol=1e-14, max_iter=3000)
    prof = afterimage_profile(a, f, x2=0.1, window=(2.5, 6.0))
    print(f"{kind.name}: {prof.count} sign changes of the afterimage along x2 = {prof.x2:.3f}")
    print("   zeros   ", " ".join(f"{z:.3f}" for z in prof.zeros))
    print("   spacing ", " ".join(f"{s:.3f}" for s in prof.spacings), f"(predicted {predicted:.3f})")
    diff = a - f
    write_pgm(out / f"afterimage_{kind.name}_cortex.pgm", field_to_image(diff))
    write_pgm(out / f"afterimage_{kind.name}_retina.pgm",
              warp_to_retina(binarize(diff), 768, math.exp(6), 2 / math.pi))
    write_pgm(out / f"output_{kind.name}_retina.pgm",
              warp_to_retina(binarize(a), 768, math.exp(6), 2 / math.pi))

print(f"images written to {out}")
