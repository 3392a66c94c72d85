"""
Loading and encoding a mixed-type table
=======================================

A schema file names each column and says whether it is continuous or
categorical.  Encoding min-max scales the continuous columns using only
observed values and one-hot encodes the categorical ones (a two-level
column becomes a single 0/1 column).
"""
import os

import numpy as np

from fsimpute import Schema, decode, encode, read_csv

here = os.path.dirname(os.path.abspath(__file__))
configs = os.path.join(here, "..", "configs")

schema = Schema.load(os.path.join(configs, "example.schema"))
ds = read_csv(os.path.join(configs, "example_data.csv"), schema)
print(len(ds), "rows, columns:", schema.names, "label:", schema.label)

# blank a few cells to see how the mask looks
holes = np.zeros((len(ds), len(schema.names)), dtype=bool)
holes[0, 0] = holes[1, 3] = True
ds = ds.with_missing(holes)

enc = encode(ds)
print("encoded width:", enc.map.width)
for c in enc.map.columns:
    print(f"  {c.name:8s} {c.kind:12s} columns {c.start}:{c.stop}")

# the stage one-hot span of row 1 is masked as a whole
print("mask row 1:", enc.mask[1].astype(int))

# decoding maps back to the original units and category labels
back = decode(enc.x, enc.map, ds.schema, ds.values[schema.label])
print(back.to_csv().splitlines()[2])
