"""Tile grid over an orthomosaic and tile-local/global coordinate transforms.

The grid is row-major with ``ceil(W/T) x ceil(H/T)`` tiles of size T; edge
tiles may be partial but are never padded or dropped. Transforms shift
vertex coordinates by the integer tile origin ``(col*T, row*T)``, so a
to-local/to-global round trip is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

from .errors import TileError
from .ingest import InstanceRecord


@dataclass(frozen=True)
class TileIndex:
    row: int
    col: int
    origin_x_px: int
    origin_y_px: int
    width_px: int
    height_px: int


@dataclass(frozen=True)
class TileGrid:
    width_px: int
    height_px: int
    tile_size: int = 512

    def __post_init__(self) -> None:
        if self.width_px < 1 or self.height_px < 1:
            raise TileError(
                f"grid dimensions must be >= 1 px, got {self.width_px} x {self.height_px}"
            )
        if self.tile_size < 1:
            raise TileError(f"tile size must be >= 1 px, got {self.tile_size}")

    @property
    def n_rows(self) -> int:
        return math.ceil(self.height_px / self.tile_size)

    @property
    def n_cols(self) -> int:
        return math.ceil(self.width_px / self.tile_size)

    def tile(self, row: int, col: int) -> TileIndex:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise TileError(
                f"tile ({row}, {col}) outside the {self.n_rows} x {self.n_cols} grid"
            )
        ox = col * self.tile_size
        oy = row * self.tile_size
        return TileIndex(
            row=row,
            col=col,
            origin_x_px=ox,
            origin_y_px=oy,
            width_px=min(self.tile_size, self.width_px - ox),
            height_px=min(self.tile_size, self.height_px - oy),
        )

    def tiles(self) -> Iterator[TileIndex]:
        for row in range(self.n_rows):
            for col in range(self.n_cols):
                yield self.tile(row, col)


def tile_grid(width_px: int, height_px: int, tile_size: int = 512) -> list[TileIndex]:
    """Row-major list of all tiles covering a width x height pixel plane."""
    return list(TileGrid(width_px, height_px, tile_size).tiles())


def to_global(record: InstanceRecord, grid: TileGrid) -> InstanceRecord:
    """Shift a tile-local record into the global frame and clear its tile index."""
    if record.tile is None:
        raise TileError(f"record {record.id} has no tile index")
    tile = grid.tile(*record.tile)
    shifted = tuple((x + tile.origin_x_px, y + tile.origin_y_px) for x, y in record.polygon)
    return replace(record, polygon=shifted, tile=None)


def to_local(record: InstanceRecord, grid: TileGrid, row: int, col: int) -> InstanceRecord:
    """Express a global record in one tile's local frame (inverse of to_global)."""
    if record.tile is not None:
        raise TileError(f"record {record.id} already carries tile {record.tile}")
    tile = grid.tile(row, col)
    shifted = tuple((x - tile.origin_x_px, y - tile.origin_y_px) for x, y in record.polygon)
    return replace(record, polygon=shifted, tile=(row, col))
