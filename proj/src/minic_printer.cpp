#include "declab/minic/print.hpp"

#include <charconv>

namespace declab::minic {

namespace {

// Binding strength; higher binds tighter.
int prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      switch (e.bin_op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
        case BinOp::Ge: case BinOp::Eq: case BinOp::Ne: return 3;
        case BinOp::Add: case BinOp::Sub: return 4;
        case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 5;
      }
      return 5;
    case Expr::Kind::Unary:
    case Expr::Kind::Deref:
    case Expr::Kind::Cast:
    case Expr::Kind::Ambig:  // prints as `(a)*u`, a cast-shaped form
      return 6;
    default:
      return 7;
  }
}

std::string ty_name(const TyRef& t) {
  switch (t->kind) {
    case Ty::Kind::Int: return "int";
    case Ty::Kind::Float: return "double";
    case Ty::Kind::Void: return "void";
    case Ty::Kind::Alias: return t->alias_name;
    default: return ty_to_string(t);
  }
}

std::string format_decl(const TyRef& ty, const std::string& name) {
  if (ty->kind == Ty::Kind::Ptr) return ty_name(ty->elem) + " *" + name;
  return ty_name(ty) + " " + name;
}

void emit_expr(const Expr& e, int min_prec, std::string& out);

void emit_child(const Expr& e, int min_prec, std::string& out) {
  if (prec(e) < min_prec) {
    out += '(';
    emit_expr(e, 1, out);
    out += ')';
  } else {
    emit_expr(e, min_prec, out);
  }
}

void emit_expr(const Expr& e, int /*min_prec*/, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      out += std::to_string(e.int_val);
      break;
    case Expr::Kind::FloatLit:
      out += format_float(e.float_val);
      break;
    case Expr::Kind::StringLit:
      out += '"';
      out += e.str_val;
      out += '"';
      break;
    case Expr::Kind::Var:
      out += e.name;
      break;
    case Expr::Kind::Unary:
      out += (e.un_op == UnOp::Neg) ? '-' : '!';
      emit_child(*e.lhs, 6, out);
      break;
    case Expr::Kind::Deref:
      out += '*';
      emit_child(*e.lhs, 6, out);
      break;
    case Expr::Kind::AddrOf:
      out += '&';
      out += e.name;
      break;
    case Expr::Kind::Cast:
      out += '(';
      out += ty_name(e.cast_ty);
      out += ')';
      emit_child(*e.lhs, 6, out);
      break;
    case Expr::Kind::Binary: {
      int p = prec(e);
      emit_child(*e.lhs, p, out);
      out += ' ';
      out += binop_text(e.bin_op);
      out += ' ';
      emit_child(*e.rhs, p + 1, out);
      break;
    }
    case Expr::Kind::Index:
      emit_child(*e.lhs, 7, out);
      out += '[';
      emit_expr(*e.rhs, 1, out);
      out += ']';
      break;
    case Expr::Kind::Call: {
      out += e.name;
      out += '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        emit_expr(*e.args[i], 1, out);
      }
      out += ')';
      break;
    }
    case Expr::Kind::Ambig:
      // Surface-faithful form; only reachable on partially-parsed trees.
      out += '(';
      out += e.name;
      out += ")*";
      emit_child(*e.rhs->rhs, 6, out);
      break;
  }
}

void emit_indent(int depth, std::string& out) {
  out.append(static_cast<size_t>(depth) * 2, ' ');
}

void emit_block(const std::vector<StmtPtr>& body, int depth, std::string& out);

void emit_inline_stmt(const Stmt& s, std::string& out) {
  // Declarations and assignments inside a for-header, without ';'.
  if (s.kind == Stmt::Kind::Decl) {
    out += format_decl(s.decl_ty, s.decl_name);
    if (s.init) {
      out += " = ";
      emit_expr(*s.init, 1, out);
    }
  } else {
    emit_expr(*s.target, 1, out);
    out += " = ";
    emit_expr(*s.value, 1, out);
  }
}

void emit_stmt(const Stmt& s, int depth, std::string& out) {
  emit_indent(depth, out);
  switch (s.kind) {
    case Stmt::Kind::Decl:
      emit_inline_stmt(s, out);
      out += ";\n";
      break;
    case Stmt::Kind::Assign:
      emit_inline_stmt(s, out);
      out += ";\n";
      break;
    case Stmt::Kind::If:
      out += "if (";
      emit_expr(*s.cond, 1, out);
      out += ") {\n";
      emit_block(s.body, depth + 1, out);
      emit_indent(depth, out);
      if (!s.else_body.empty()) {
        out += "} else {\n";
        emit_block(s.else_body, depth + 1, out);
        emit_indent(depth, out);
      }
      out += "}\n";
      break;
    case Stmt::Kind::While:
      out += "while (";
      emit_expr(*s.cond, 1, out);
      out += ") {\n";
      emit_block(s.body, depth + 1, out);
      emit_indent(depth, out);
      out += "}\n";
      break;
    case Stmt::Kind::For:
      out += "for (";
      emit_inline_stmt(*s.for_init, out);
      out += "; ";
      emit_expr(*s.cond, 1, out);
      out += "; ";
      emit_inline_stmt(*s.for_step, out);
      out += ") {\n";
      emit_block(s.body, depth + 1, out);
      emit_indent(depth, out);
      out += "}\n";
      break;
    case Stmt::Kind::Return:
      out += "return";
      if (s.expr) {
        out += ' ';
        emit_expr(*s.expr, 1, out);
      }
      out += ";\n";
      break;
    case Stmt::Kind::ExprStmt:
      emit_expr(*s.expr, 1, out);
      out += ";\n";
      break;
    case Stmt::Kind::AmbigDecl:
      // Surface-faithful `a *b;`; only reachable on partially-parsed trees.
      out += s.ambig_name;
      out += " *";
      out += s.decl_name;
      out += ";\n";
      break;
  }
}

void emit_block(const std::vector<StmtPtr>& body, int depth, std::string& out) {
  for (const auto& s : body) emit_stmt(*s, depth, out);
}

}  // namespace

std::string format_float(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find('E') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string print_expr(const Expr& e) {
  std::string out;
  emit_expr(e, 1, out);
  return out;
}

std::string typedef_line(const TypedefDecl& td) {
  return "typedef " + ty_name(td.ty) + " " + td.name + ";";
}

std::string extern_line(const ExternDecl& ex) {
  std::string s = "extern " + ty_name(ex.ret) + " " + ex.name + "(";
  for (size_t i = 0; i < ex.params.size(); ++i) {
    if (i) s += ", ";
    const TyRef& t = ex.params[i];
    s += (t->kind == Ty::Kind::Ptr) ? ty_name(t->elem) + " *" : ty_name(t);
  }
  return s + ");";
}

std::string pretty_print_function(const Ast& ast) {
  std::string out = ty_name(ast.ret) + " " + ast.name + "(";
  for (size_t i = 0; i < ast.params.size(); ++i) {
    if (i) out += ", ";
    out += format_decl(ast.params[i].second, ast.params[i].first);
  }
  out += ") {\n";
  emit_block(ast.body, 1, out);
  out += "}\n";
  return out;
}

std::string pretty_print(const Ast& ast) {
  std::string out;
  for (const auto& td : ast.typedefs) out += typedef_line(td) + "\n";
  for (const auto& ex : ast.externs) out += extern_line(ex) + "\n";
  return out + pretty_print_function(ast);
}

}  // namespace declab::minic
