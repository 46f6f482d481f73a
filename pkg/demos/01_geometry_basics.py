"""Polygon toolbox walkthrough: areas, hulls, minimum rectangles, IoU.

Run: python demos/01_geometry_basics.py
"""
from strkit.geometry import (
    Polygon,
    convex_hull,
    is_vertical_instance,
    min_aabb,
    min_rotated_rect,
    polygon_area,
    polygon_iou,
)

# A slightly jittered quad, the shape detector outputs usually take.
quad = Polygon([(10, 5), (92, 8), (90, 34), (11, 30)])
print("area:", round(polygon_area(quad), 2), "px^2")

box = min_aabb(quad)
print(f"axis-aligned box: ({box.x_min}, {box.y_min}) .. ({box.x_max}, {box.y_max})",
      f"area {box.area:.1f}")

rect = min_rotated_rect(quad)
print(f"min rotated rect: {rect.width:.1f} x {rect.height:.1f} at {rect.angle:.2f} deg,"
      f" area {rect.area:.1f} (tighter than the axis box: {rect.area <= box.area})")

# The hull is what non-convex annotation polygons reduce to before clipping.
points = [(0, 0), (4, 1), (8, 0), (7, 4), (4, 2.5), (1, 4)]
hull = convex_hull(points)
print("hull of a concave outline:", hull.vertices)

# IoU drives both the consensus harvest and detection matching.
a = Polygon([(0, 0), (10, 0), (10, 10), (0, 10)])
b = Polygon([(3, 0), (13, 0), (13, 10), (3, 10)])
print("IoU of two overlapping squares:", round(polygon_iou(a, b), 4))

# The vertical-text predicate: tall box and a multi-character label.
tall = Polygon([(0, 0), (30, 0), (30, 64), (0, 64)])
print("vertical('AB', 30x64):", is_vertical_instance(tall, "AB"))
print("vertical('A',  30x64):", is_vertical_instance(tall, "A"))
