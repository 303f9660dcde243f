// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace promhr {

/// Nodes, connectivity and constrained DOFs. Every node carries one scalar DOF,
/// so node ids and unconstrained global DOF ids coincide.
struct Mesh
{
   int dimension = 1;
   std::vector<std::array<double, 2>> node_coords;
   std::vector<std::vector<Index>> elements;
   std::vector<Index> dirichlet_dofs;

   Index num_nodes() const { return static_cast<Index>(node_coords.size()); }
   Index num_elements() const { return static_cast<Index>(elements.size()); }

   /// Throws InvalidInput on out-of-range node ids or Dirichlet ids.
   void validate() const;
};

/// The gather/scatter index sets realizing L^e. Constrained DOFs are eliminated
/// from the global system; their local slots map to -1 and carry the value 0.
struct AssemblyMap
{
   std::vector<std::vector<Index>> element_dofs;
   std::vector<Index> free_to_node;
   Index num_free = 0;

   static AssemblyMap from_mesh(const Mesh &mesh);

   Index num_elements() const { return static_cast<Index>(element_dofs.size()); }
   const std::vector<Index> &dofs(Index e) const { return element_dofs[static_cast<std::size_t>(e)]; }
};

/// Entries of a global (free-DOF) vector at the DOFs of element e; constrained
/// slots read as zero. Applied to an assembled residual this yields R^{Le}.
Vector gather_dofs(const AssemblyMap &assembly, Index e, const Vector &global);

/// global += L^{eT} local (constrained slots are dropped).
void scatter_add(const AssemblyMap &assembly, Index e, const Vector &local, Vector &global);

/// Rows of a global matrix at element e's DOFs (zero rows for constrained slots).
Matrix gather_rows(const AssemblyMap &assembly, Index e, const Matrix &global);

struct ElementPatch
{
   Index element = 0;
   std::vector<Index> patch;   ///< ascending; contains element itself
};

/// patch(e) = { e' : e and e' share at least one node }.
std::vector<ElementPatch> element_patches(const Mesh &mesh);

std::string mesh_to_json(const Mesh &mesh);
Mesh mesh_from_json(const std::string &text);

} // namespace promhr
