"""
快速启动脚本
"""

import sys
import subprocess
from pathlib import Path

RUNS_DIR = Path(__file__).parent / "config" / "runs"


def install_requirements():
    """安装依赖包"""
    print("正在安装依赖包...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✅ 依赖包安装完成")
        return True
    except subprocess.CalledProcessError:
        print("❌ 依赖包安装失败")
        return False


def run_example(command: str = "flow"):
    """选择示例配置并运行"""
    configs = sorted(RUNS_DIR.glob("*.yaml"))
    for i, path in enumerate(configs, start=1):
        print(f"{i}. {path.stem}")
    choice = input(f"请选择配置 (1-{len(configs)}): ").strip()
    if not choice.isdigit() or not 1 <= int(choice) <= len(configs):
        print("❌ 无效选择")
        return
    path = configs[int(choice) - 1]
    out_dir = Path("output") / path.stem
    try:
        code = subprocess.run([sys.executable, "src/main.py", command,
                               "--config", str(path), "--out", str(out_dir)]).returncode
        print(f"{'✅' if code == 0 else '❌'} 退出码 {code}，产物目录: {out_dir}")
    except Exception as e:
        print(f"❌ 运行失败: {e}")


def run_tests():
    """运行测试"""
    subprocess.run([sys.executable, "-m", "pytest", "-q"])


def main():
    """主函数"""
    print("🚀 矩阵有限带势构造平台")
    print("=" * 50)

    if sys.version_info < (3, 8):
        print("❌ 需要Python 3.8或更高版本")
        return

    print("请选择操作:")
    print("1. 安装依赖包")
    print("2. 构造并演化示例势")
    print("3. 仅构造并校验 Weyl 函数")
    print("4. 运行测试")
    print("0. 退出")

    while True:
        choice = input("\n请输入选择 (0-4): ").strip()

        if choice == "0":
            print("👋 再见!")
            break
        elif choice == "1":
            install_requirements()
        elif choice == "2":
            run_example("flow")
        elif choice == "3":
            run_example("build")
        elif choice == "4":
            run_tests()
        else:
            print("❌ 无效选择，请重试")


if __name__ == "__main__":
    main()
