"""Regenerates the reference-tool fixtures used by the io tests.

Requires SimpleITK, nibabel and vtk. Voxel values follow
v(i, j, k) = i + 10*j + 100*k - 50 (0-based indices, x fastest) so tests can
recompute them without reading any sidecar data.
"""
import json
import os
import struct

import nibabel as nib
import numpy as np
import SimpleITK as sitk
import vtk

HERE = os.path.dirname(os.path.abspath(__file__))
expected = {}


def pattern(size):
    nx, ny, nz = size
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    return (i + 10 * j + 100 * k - 50).astype(np.int16)  # z, y, x order


def rot(ax, ay, az):
    cx, sx, cy, sy, cz, sz = np.cos(ax), np.sin(ax), np.cos(ay), np.sin(ay), np.cos(az), np.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def sitk_meta(im):
    return {
        "size": list(im.GetSize()),
        "spacing": list(im.GetSpacing()),
        "origin": list(im.GetOrigin()),
        "orientation_row_major": list(im.GetDirection()),
    }


# MetaImage, 3D int16, oblique direction
size = (5, 4, 3)
im = sitk.GetImageFromArray(pattern(size))
im.SetSpacing((0.7, 1.2, 2.5))
im.SetOrigin((-12.5, 3.25, 40.0))
im.SetDirection(rot(0.2, -0.1, 0.3).flatten().tolist())
sitk.WriteImage(im, os.path.join(HERE, "ref_int16.mhd"))
expected["ref_int16.mhd"] = sitk_meta(sitk.ReadImage(os.path.join(HERE, "ref_int16.mhd")))

# MetaImage, 2D uint8, embedded payload
arr2 = (np.arange(6 * 4).reshape(4, 6) * 10).astype(np.uint8)
im2 = sitk.GetImageFromArray(arr2)
im2.SetSpacing((0.5, 0.25))
im2.SetOrigin((1.0, -2.0))
sitk.WriteImage(im2, os.path.join(HERE, "ref_uint8_2d.mha"))
expected["ref_uint8_2d.mha"] = sitk_meta(im2)

# GIPL (ITK drops the direction)
img = sitk.GetImageFromArray(pattern(size))
img.SetSpacing((0.7, 1.2, 2.5))
img.SetOrigin((-12.5, 3.25, 40.0))
sitk.WriteImage(img, os.path.join(HERE, "ref_int16.gipl"))
expected["ref_int16.gipl"] = sitk_meta(sitk.ReadImage(os.path.join(HERE, "ref_int16.gipl")))


def nifti_meta(affine, shape):
    a = np.asarray(affine, dtype=float)
    lin = a[:3, :3]
    sp = np.linalg.norm(lin, axis=0)
    return {
        "size": list(shape),
        "spacing": sp.tolist(),
        "origin": a[:3, 3].tolist(),
        "orientation_row_major": (lin / sp).flatten().tolist(),
    }


# NIfTI with identity affine, float32 payload
data = np.transpose(pattern(size), (2, 1, 0)).astype(np.float32)  # x, y, z
n1 = nib.Nifti1Image(data, np.eye(4))
nib.save(n1, os.path.join(HERE, "identity.nii"))
expected["identity.nii"] = nifti_meta(np.eye(4), size)

# NIfTI with rotated sform, spacing and offset, int16 payload
aff = np.eye(4)
aff[:3, :3] = rot(0.0, 0.0, 0.5) @ np.diag([0.8, 1.5, 3.0])
aff[:3, 3] = [-20.0, 7.5, 1.25]
n2 = nib.Nifti1Image(np.transpose(pattern(size), (2, 1, 0)), aff)
n2.set_qform(None, code=0)
n2.set_sform(aff, code=1)
nib.save(n2, os.path.join(HERE, "sform_rot.nii"))
expected["sform_rot.nii"] = nifti_meta(n2.get_sform(), size)

# NIfTI with only a quaternion (qform), left-handed (qfac = -1)
aff_q = np.eye(4)
aff_q[:3, :3] = rot(0.3, 0.0, 0.0) @ np.diag([1.0, 2.0, -0.5])
aff_q[:3, 3] = [5.0, -6.0, 7.0]
n3 = nib.Nifti1Image(np.transpose(pattern(size), (2, 1, 0)), None)
n3.set_qform(aff_q, code=1)
n3.set_sform(None, code=0)
nib.save(n3, os.path.join(HERE, "qform.nii"))
expected["qform.nii"] = nifti_meta(n3.get_qform(), size)

# NIfTI with scl_slope = 2, scl_inter = 1 patched into the header
path = os.path.join(HERE, "scaled.nii")
n4 = nib.Nifti1Image(np.transpose(pattern(size), (2, 1, 0)), np.eye(4))
n4.header.set_slope_inter(1.0, 0.0)
nib.save(n4, path)
raw = bytearray(open(path, "rb").read())
raw[112:120] = struct.pack("<ff", 2.0, 1.0)
open(path, "wb").write(bytes(raw))
expected["scaled.nii"] = dict(nifti_meta(np.eye(4), size), scl_slope=2.0, scl_inter=1.0)

nib.save(n1, os.path.join(HERE, "identity.nii.gz"))

# Legacy VTK polydata with a point scalar and a cell vector attribute
sphere = vtk.vtkSphereSource()
sphere.SetRadius(3.0)
sphere.SetThetaResolution(8)
sphere.SetPhiResolution(6)
sphere.Update()
pd = sphere.GetOutput()
pd.GetPointData().RemoveArray("Normals")
sc = vtk.vtkDoubleArray()
sc.SetName("height")
for i in range(pd.GetNumberOfPoints()):
    sc.InsertNextValue(pd.GetPoint(i)[2])
pd.GetPointData().SetScalars(sc)
vec = vtk.vtkDoubleArray()
vec.SetName("cellvec")
vec.SetNumberOfComponents(3)
for i in range(pd.GetNumberOfCells()):
    vec.InsertNextTuple3(i, 2 * i, -i)
pd.GetCellData().SetVectors(vec)
w = vtk.vtkPolyDataWriter()
w.SetFileName(os.path.join(HERE, "ref_sphere.vtk"))
w.SetFileTypeToASCII()
w.SetInputData(pd)
w.Write()
expected["ref_sphere.vtk"] = {"points": pd.GetNumberOfPoints(), "triangles": pd.GetNumberOfCells()}
w42 = vtk.vtkPolyDataWriter()
w42.SetFileName(os.path.join(HERE, "ref_sphere_v42.vtk"))
w42.SetFileTypeToASCII()
w42.SetFileVersion(42)
w42.SetInputData(pd)
w42.Write()
expected["ref_sphere_v42.vtk"] = expected["ref_sphere.vtk"]

# Binary STL of a triangulated cube (12 facets, 36 raw vertices)
cube = vtk.vtkCubeSource()
cube.SetXLength(2.0)
cube.SetYLength(4.0)
cube.SetZLength(6.0)
tri = vtk.vtkTriangleFilter()
tri.SetInputConnection(cube.GetOutputPort())
sw = vtk.vtkSTLWriter()
sw.SetFileName(os.path.join(HERE, "ref_cube_binary.stl"))
sw.SetFileTypeToBinary()
sw.SetInputConnection(tri.GetOutputPort())
sw.Write()
expected["ref_cube_binary.stl"] = {"points": 8, "triangles": 12}

with open(os.path.join(HERE, "single_triangle.stl"), "w") as f:
    f.write(
        "solid tri\n"
        "  facet normal 0 0 1\n"
        "    outer loop\n"
        "      vertex 0 0 0\n"
        "      vertex 1 0 0\n"
        "      vertex 0 1 0\n"
        "    endloop\n"
        "  endfacet\n"
        "endsolid tri\n"
    )

# MITK point set in the layout MITK Workbench exports
pts = [(0, (1.5, -2.0, 3.25)), (1, (10.0, 20.0, 30.0)), (4, (-7.125, 0.0, 2.5))]
body = "".join(
    "            <point>\n"
    f"                <id>{pid}</id>\n"
    "                <specification>0</specification>\n"
    f"                <x>{x}</x>\n                <y>{y}</y>\n                <z>{z}</z>\n"
    "            </point>\n"
    for pid, (x, y, z) in pts
)
with open(os.path.join(HERE, "ref_points.mps"), "w") as f:
    f.write(
        '<?xml version="1.0" encoding="UTF-8" ?>\n'
        "<point_set_file>\n"
        "    <file_version>0.1</file_version>\n"
        "    <point_set>\n"
        "        <time_series>\n"
        "            <time_series_id>0</time_series_id>\n"
        '            <Geometry3D ImageGeometry="false" FrameOfReferenceID="0">\n'
        '                <IndexToWorld type="Matrix3x3" m_0_0="1" m_0_1="0" m_0_2="0" m_1_0="0" m_1_1="1" m_1_2="0" m_2_0="0" m_2_1="0" m_2_2="1" />\n'
        '                <Offset type="Vector3D" x="0" y="0" z="0" />\n'
        "                <Bounds>\n"
        '                    <Min type="Vector3D" x="-7.125" y="-2" z="0" />\n'
        '                    <Max type="Vector3D" x="10" y="20" z="30" />\n'
        "                </Bounds>\n"
        "            </Geometry3D>\n" + body +
        "        </time_series>\n"
        "    </point_set>\n"
        "</point_set_file>\n"
    )
expected["ref_points.mps"] = {"ids": [p[0] for p in pts], "points": [list(p[1]) for p in pts]}

with open(os.path.join(HERE, "expected.json"), "w") as f:
    json.dump(expected, f, indent=2, sort_keys=True)
