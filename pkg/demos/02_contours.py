"""Contour functions of a sampled forest and the truncation map pi_a.

pi_a removes the time a path spends strictly above level a. Applied to the
contour of a tree at an integer level, it gives the contour of the tree cut
at that height. Writes contours.svg next to this script.
"""

from pathlib import Path

from gwlimits import contour as ct
from gwlimits import gwtree
from gwlimits.offspring import OffspringDistribution
from gwlimits.streams import substream

p = OffspringDistribution([0.3, 0.2, 0.3, 0.2])
rng = substream(3, "demo-contour")
forest = gwtree.sample_forest(p, 4, 6, rng)
print("generation sizes:", gwtree.generation_sizes(forest))

path = ct.forest_contour(forest)
print(f"duration {path.active_duration:g} = 2 x {gwtree.node_count(forest)} nodes")

for a in (2, 4):
    cut = ct.truncate(path, a)
    print(f"pi_{a}: duration {cut.active_duration:g}, sup {ct.sup_path(cut):g}, "
          f"upcrossings of {a - 0.5} = {ct.upcrossings(path, a - 0.5)}")

tree = forest.trees[0]
print("pi_2 of a contour equals the contour of r_2 t:",
      ct.truncate(ct.contour_of(tree), 2).same_knots(ct.contour_of(gwtree.truncate_tree(tree, 2))))

out = Path(__file__).with_name("contours.svg")
out.write_text(ct.to_svg([path, ct.truncate(path, 4), ct.truncate(path, 2)], ["forest", "pi_4", "pi_2"]))
print("wrote", out)
