"""Plain-text mesh files.

Format::

    $nodes N
    x y            (N lines, full precision)
    $triangles M
    i j k          (M lines, 0-based, counterclockwise)

Edges are never stored; they are re-derived when the file is loaded.
"""
from pathlib import Path
from typing import List, Tuple

import numpy as np

from sipdg.models.common.error_models import MeshValidationError
from sipdg.models.domain.mesh import Mesh, mesh_from_arrays
from sipdg.utils.logging import get_logger
from sipdg.utils.validation import validate_output_path

logger = get_logger(__name__)


class MeshFileHandler:
    def __init__(self, filename: str):
        """
        Initialize the handler with the path of the mesh file.

        :param filename: The path to the mesh file to read or write.
        """
        self._filename: str = filename

    def _parse_header(self, line: str, keyword: str, line_number: int) -> int:
        parts = line.split()
        if len(parts) != 2 or parts[0] != keyword:
            raise MeshValidationError(f"Expected '{keyword} <count>' on line {line_number}, got '{line.strip()}'")
        try:
            count = int(parts[1])
        except ValueError as e:
            raise MeshValidationError(f"Invalid count on line {line_number}: '{parts[1]}'") from e
        if count < 0:
            raise MeshValidationError(f"Negative count on line {line_number}")
        return count

    def _parse_block(self, lines: List[str], start: int, count: int, width: int, kind: type) -> List[Tuple]:
        if start + count > len(lines):
            raise MeshValidationError(f"File ends before {count} entries starting on line {start + 1} were read")
        rows = []
        for offset in range(count):
            parts = lines[start + offset].split()
            if len(parts) != width:
                raise MeshValidationError(f"Line {start + offset + 1} must hold {width} values")
            try:
                rows.append(tuple(kind(part) for part in parts))
            except ValueError as e:
                raise MeshValidationError(f"Malformed value on line {start + offset + 1}: {e}") from e
        return rows

    def read(self) -> Mesh:
        """
        Read the mesh file and build a validated mesh.

        :return: The mesh, with edges derived from the triangles.
        :raises MeshValidationError: The file is malformed or the mesh is invalid.
        :raises FileNotFoundError: The file does not exist.
        """
        logger.info(f"Reading mesh file: {self._filename}")
        try:
            with open(self._filename, mode='r', encoding='utf-8') as file:
                lines = [line for line in file.read().splitlines() if line.strip()]
        except FileNotFoundError:
            error_msg = f"The file '{self._filename}' was not found."
            logger.error(error_msg)
            raise FileNotFoundError(error_msg)

        if not lines:
            raise MeshValidationError(f"Mesh file '{self._filename}' is empty")
        n_nodes = self._parse_header(lines[0], "$nodes", 1)
        nodes = self._parse_block(lines, 1, n_nodes, 2, float)
        header_index = 1 + n_nodes
        if header_index >= len(lines):
            raise MeshValidationError("Missing '$triangles' section")
        n_triangles = self._parse_header(lines[header_index], "$triangles", header_index + 1)
        triangles = self._parse_block(lines, header_index + 1, n_triangles, 3, int)
        if header_index + 1 + n_triangles != len(lines):
            raise MeshValidationError("Unexpected content after the triangle section")

        mesh = mesh_from_arrays(np.asarray(nodes, dtype=float).reshape(-1, 2),
                                np.asarray(triangles, dtype=np.int64).reshape(-1, 3))
        logger.info(f"Successfully read {mesh.n_triangles} triangles from {self._filename}")
        return mesh

    def write(self, mesh: Mesh) -> None:
        """
        Write the vertices and triangles of a mesh.

        :param mesh: The mesh to write.
        :raises ValidationError: The target path cannot be written.
        :return: None
        """
        validate_output_path(self._filename).raise_if_invalid()
        target = Path(self._filename)
        try:
            logger.info(f"Writing mesh with {mesh.n_triangles} triangles to {target}")
            with target.open(mode='w', encoding='utf-8') as file:
                file.write(f"$nodes {mesh.n_vertices}\n")
                for x, y in mesh.vertices.tolist():
                    file.write(f"{x:.17g} {y:.17g}\n")
                file.write(f"$triangles {mesh.n_triangles}\n")
                for i, j, k in mesh.triangles.tolist():
                    file.write(f"{i} {j} {k}\n")
        except OSError as e:
            logger.error(f"An error occurred while writing the mesh file: {e}")
            raise


def read_mesh(path: str) -> Mesh:
    return MeshFileHandler(path).read()


def write_mesh(mesh: Mesh, path: str) -> None:
    MeshFileHandler(path).write(mesh)
