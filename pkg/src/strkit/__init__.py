"""strkit: scene-text dataset consolidation and benchmark tooling.

Submodules map one-to-one onto pipeline stages:

  manifest     record types + jsonl I/O + format adapters
  geometry     polygon algebra (areas, hulls, min rects, IoU)
  imaging      crops: axis-aligned, rotated-rectified, character strips
  voting       multi-detector consensus harvest of pseudo labels
  consolidate  filters, dedup, collision queues, corpus statistics
  difficulty   ensemble error-voting difficulty levels
  metrics      WA/WAIC/WAICS, incomplete margin, saturation scope
  benchmark    stratified/mutation/reviewed subset assembly
  review       HTTP curation service
  synth        seeded synthetic fixture corpora
  cli          subcommand front end over all of the above
"""

__version__ = "0.1.0"
