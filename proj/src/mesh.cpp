// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/mesh.hpp"

#include "promhr/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>

namespace promhr {

void Mesh::validate() const
{
   if (dimension != 1 && dimension != 2)
   {
      throw InvalidInput("mesh dimension must be 1 or 2");
   }
   const Index nn = num_nodes();
   for (std::size_t e = 0; e < elements.size(); ++e)
   {
      if (elements[e].empty())
      {
         throw InvalidInput("element " + std::to_string(e) + " has no nodes");
      }
      for (Index v : elements[e])
      {
         if (v < 0 || v >= nn)
         {
            throw InvalidInput("element " + std::to_string(e) + " references node " +
                               std::to_string(v) + " outside [0, " + std::to_string(nn) + ")");
         }
      }
   }
   for (Index d : dirichlet_dofs)
   {
      if (d < 0 || d >= nn)
      {
         throw InvalidInput("Dirichlet DOF " + std::to_string(d) + " out of range");
      }
   }
}

AssemblyMap AssemblyMap::from_mesh(const Mesh &mesh)
{
   mesh.validate();
   std::vector<bool> fixed(static_cast<std::size_t>(mesh.num_nodes()), false);
   for (Index d : mesh.dirichlet_dofs)
   {
      fixed[static_cast<std::size_t>(d)] = true;
   }
   std::vector<Index> node_to_free(fixed.size(), -1);
   AssemblyMap map;
   for (std::size_t v = 0; v < fixed.size(); ++v)
   {
      if (!fixed[v])
      {
         node_to_free[v] = map.num_free++;
         map.free_to_node.push_back(static_cast<Index>(v));
      }
   }
   map.element_dofs.reserve(mesh.elements.size());
   for (const auto &conn : mesh.elements)
   {
      std::vector<Index> dofs;
      dofs.reserve(conn.size());
      for (Index v : conn)
      {
         dofs.push_back(node_to_free[static_cast<std::size_t>(v)]);
      }
      map.element_dofs.push_back(std::move(dofs));
   }
   return map;
}

Vector gather_dofs(const AssemblyMap &assembly, Index e, const Vector &global)
{
   const auto &dofs = assembly.dofs(e);
   Vector local(static_cast<Index>(dofs.size()));
   for (std::size_t i = 0; i < dofs.size(); ++i)
   {
      local(static_cast<Index>(i)) = dofs[i] >= 0 ? global(dofs[i]) : 0.0;
   }
   return local;
}

void scatter_add(const AssemblyMap &assembly, Index e, const Vector &local, Vector &global)
{
   const auto &dofs = assembly.dofs(e);
   for (std::size_t i = 0; i < dofs.size(); ++i)
   {
      if (dofs[i] >= 0)
      {
         global(dofs[i]) += local(static_cast<Index>(i));
      }
   }
}

Matrix gather_rows(const AssemblyMap &assembly, Index e, const Matrix &global)
{
   const auto &dofs = assembly.dofs(e);
   Matrix local = Matrix::Zero(static_cast<Index>(dofs.size()), global.cols());
   for (std::size_t i = 0; i < dofs.size(); ++i)
   {
      if (dofs[i] >= 0)
      {
         local.row(static_cast<Index>(i)) = global.row(dofs[i]);
      }
   }
   return local;
}

std::vector<ElementPatch> element_patches(const Mesh &mesh)
{
   std::vector<std::vector<Index>> node_elems(static_cast<std::size_t>(mesh.num_nodes()));
   for (Index e = 0; e < mesh.num_elements(); ++e)
   {
      for (Index v : mesh.elements[static_cast<std::size_t>(e)])
      {
         node_elems[static_cast<std::size_t>(v)].push_back(e);
      }
   }
   std::vector<ElementPatch> out;
   out.reserve(mesh.elements.size());
   for (Index e = 0; e < mesh.num_elements(); ++e)
   {
      std::set<Index> members;
      for (Index v : mesh.elements[static_cast<std::size_t>(e)])
      {
         const auto &ne = node_elems[static_cast<std::size_t>(v)];
         members.insert(ne.begin(), ne.end());
      }
      out.push_back({e, std::vector<Index>(members.begin(), members.end())});
   }
   return out;
}

std::string mesh_to_json(const Mesh &mesh)
{
   nlohmann::json j;
   j["dimension"] = mesh.dimension;
   auto &nodes = j["nodes"] = nlohmann::json::array();
   for (const auto &c : mesh.node_coords)
   {
      if (mesh.dimension == 1)
      {
         nodes.push_back({c[0]});
      }
      else
      {
         nodes.push_back({c[0], c[1]});
      }
   }
   j["elements"] = mesh.elements;
   j["dirichlet_dofs"] = mesh.dirichlet_dofs;
   return j.dump(1);
}

Mesh mesh_from_json(const std::string &text)
{
   Mesh mesh;
   try
   {
      const auto j = nlohmann::json::parse(text);
      mesh.dimension = j.at("dimension").get<int>();
      for (const auto &n : j.at("nodes"))
      {
         if (n.size() != static_cast<std::size_t>(mesh.dimension))
         {
            throw InvalidInput("node coordinate arity does not match mesh dimension");
         }
         std::array<double, 2> c{0.0, 0.0};
         for (std::size_t k = 0; k < n.size(); ++k)
         {
            c[k] = n[k].get<double>();
         }
         mesh.node_coords.push_back(c);
      }
      mesh.elements = j.at("elements").get<std::vector<std::vector<Index>>>();
      mesh.dirichlet_dofs = j.at("dirichlet_dofs").get<std::vector<Index>>();
   }
   catch (const nlohmann::json::exception &e)
   {
      throw InvalidInput(std::string("mesh JSON: ") + e.what());
   }
   mesh.validate();
   return mesh;
}

} // namespace promhr
